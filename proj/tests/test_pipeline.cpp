#include "hsd/errors.hpp"
#include "hsd/linear.hpp"
#include "hsd/pipeline.hpp"

#include "support/corpora.hpp"
#include "support/tmpdir.hpp"

#include <doctest.h>

#include <filesystem>
#include <regex>
#include <sstream>

using namespace hsd;

namespace {

std::string tiny_train_csv() {
    std::string csv = "id,text,label\n";
    // enough of each class that stratified splits and the cascade train
    for (int i = 0; i < 12; ++i) csv += "c" + std::to_string(i) + ",xin chào bạn tốt,0\n";
    for (int i = 0; i < 6; ++i) csv += "o" + std::to_string(i) + ",đồ ngu quá,1\n";
    for (int i = 0; i < 6; ++i) csv += "h" + std::to_string(i) + ",ghét bọn chúng nó,2\n";
    return csv;
}

PipelineConfig base_config(const testutil::TmpDir& tmp, ModelKind kind) {
    PipelineConfig cfg;
    cfg.train_csv = tmp.file("train.csv");
    cfg.output_dir = tmp.file(std::string("out_") + to_string(kind));
    cfg.model = kind;
    cfg.hidden_size = 4;
    cfg.embed_dim = 4;
    cfg.train.epochs = 3;
    cfg.train.batch_size = 4;
    cfg.train.seed = 11;
    cfg.split_ratio = 0.75;
    return cfg;
}

// Strip the wall-clock line (the one field excluded from reproducibility).
std::string strip_wall(const std::string& s) {
    return std::regex_replace(s, std::regex("wall_clock_seconds = [^\n]*\n"), "");
}

} // namespace

TEST_CASE("ini parsing and config fields") {
    const std::string ini =
        "# comment\n"
        "[paths]\n"
        "output_dir = out\n"
        "[preprocess]\n"
        "lowercase = true\n"
        "strip_urls = false\n"
        "replace_empty = !?\n"
        "[vocab]\n"
        "min_freq = 2\n"
        "max_size = 100\n"
        "max_len = 32\n"
        "[model]\n"
        "kind = gru\n"
        "hidden_size = 12\n"
        "pooling = mean_over_time\n"
        "[train]\n"
        "epochs = 7\n"
        "optimizer = sgd\n"
        "learning_rate = 0.25\n"
        "class_weights = 1,2,3\n"
        "split_ratio = 0.9\n"
        "stratified = false\n"
        "precision = single\n";
    const PipelineConfig cfg = PipelineConfig::parse(ini, "mem");
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.preprocess.lowercase);
    CHECK(!cfg.preprocess.strip_urls);
    CHECK(cfg.preprocess.replace_empty == U"!?");
    CHECK(cfg.min_freq == 2);
    CHECK(cfg.max_size == 100);
    CHECK(cfg.max_len == 32);
    CHECK(cfg.model == ModelKind::Gru);
    CHECK(cfg.hidden_size == 12);
    CHECK(cfg.pooling == Pooling::MeanOverTime);
    CHECK(cfg.train.epochs == 7);
    CHECK(cfg.train.optimizer == OptimizerKind::Sgd);
    CHECK(cfg.train.learning_rate == 0.25);
    CHECK(cfg.split_ratio == 0.9);
    CHECK(!cfg.stratified);
    CHECK(cfg.train.precision == PrecisionMode::Single);
    const auto cw = cfg.resolve_class_weights({1, 1, 1});
    REQUIRE(cw.has_value());
    CHECK((*cw)[2] == 3.0);

    CHECK_THROWS_AS(PipelineConfig::parse("[paths]\nbogus = 1\n", "mem"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("[nope]\nx = 1\n", "mem"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("[train]\nepochs\n", "mem"), ConfigError);
    CHECK_THROWS_AS(PipelineConfig::parse("[model]\nkind = mystery\n", "mem"), ConfigError);
}

TEST_CASE("auto class weights are inverse frequency") {
    PipelineConfig cfg;
    cfg.class_weights_spec = "auto";
    const auto cw = cfg.resolve_class_weights({18614, 1022, 709});
    REQUIRE(cw.has_value());
    CHECK((*cw)[0] == doctest::Approx(20345.0 / (3 * 18614.0)).epsilon(1e-12));
    CHECK((*cw)[2] == doctest::Approx(20345.0 / (3 * 709.0)).epsilon(1e-12));
    cfg.class_weights_spec = "";
    CHECK(!cfg.resolve_class_weights({1, 1, 1}).has_value());
}

TEST_CASE("run_stats prints the frequency table and rejects bad inputs") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    PipelineConfig cfg = base_config(tmp, ModelKind::LogReg);
    std::ostringstream out;
    const ClassDistribution dist = run_stats(cfg, out);
    CHECK(dist.total == 24);
    CHECK(dist.counts[0] == 12);
    CHECK(out.str().find("Frequency") != std::string::npos);
    CHECK(out.str().find("Percentage") != std::string::npos);

    SUBCASE("empty dataset") {
        tmp.write("train.csv", "id,text,label\n");
        CHECK_THROWS_AS(run_stats(cfg, out), DataError);
    }
    SUBCASE("unlabeled csv names the first unlabeled id") {
        tmp.write("train.csv", "id,text\nu1,hello\n");
        CHECK_THROWS_WITH_AS(run_stats(cfg, out), doctest::Contains("u1"), DataError);
    }
}

TEST_CASE("run_train trains every model family end to end") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    for (ModelKind kind : {ModelKind::LogReg, ModelKind::SvmCascade, ModelKind::Gru,
                           ModelKind::Lstm, ModelKind::BiLstm}) {
        CAPTURE(to_string(kind));
        PipelineConfig cfg = base_config(tmp, kind);
        std::ostringstream out;
        const TrainOutcome outcome = run_train(cfg, out);
        CHECK(outcome.record.model_name == display_name(kind));
        CHECK(!outcome.record.epoch_losses.empty());
        CHECK(std::filesystem::exists(cfg.output_dir + "/pipeline.txt"));
        CHECK(std::filesystem::exists(cfg.output_dir + "/runrecord.txt"));
        CHECK(std::filesystem::exists(cfg.output_dir + "/held_out.csv"));
        if (cfg.is_linear()) {
            CHECK(std::filesystem::exists(cfg.output_dir + "/tfidf.tsv"));
        } else {
            CHECK(std::filesystem::exists(cfg.output_dir + "/vocab.txt"));
            CHECK(std::filesystem::exists(cfg.output_dir + "/model.ckpt"));
        }
        CHECK(out.str().find("Confusion matrix") != std::string::npos);
    }
}

TEST_CASE("logreg with zero learning rate checkpoints its initialization") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    PipelineConfig cfg = base_config(tmp, ModelKind::LogReg);
    cfg.train.learning_rate = 0.0;
    cfg.train.epochs = 1;
    std::ostringstream out;
    run_train(cfg, out);
    const LinearModel model = load_linear(cfg.output_dir + "/linear.model");
    CHECK(model.weights.isZero(0.0)); // multinomial logreg initializes at zero
    CHECK(model.bias.isZero(0.0));
}

TEST_CASE("identical config and seed reproduce the run byte for byte") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    for (ModelKind kind : {ModelKind::LogReg, ModelKind::BiLstm}) {
        CAPTURE(to_string(kind));
        PipelineConfig cfg = base_config(tmp, kind);
        std::ostringstream out1, out2;
        const TrainOutcome a = run_train(cfg, out1);
        const std::string record_a = testutil::slurp(cfg.output_dir + "/runrecord.txt");
        const TrainOutcome b = run_train(cfg, out2);
        const std::string record_b = testutil::slurp(cfg.output_dir + "/runrecord.txt");

        REQUIRE(a.record.epoch_losses.size() == b.record.epoch_losses.size());
        for (size_t e = 0; e < a.record.epoch_losses.size(); ++e)
            CHECK(a.record.epoch_losses[e] == b.record.epoch_losses[e]);
        CHECK(a.record.held_out.accuracy == b.record.held_out.accuracy);
        CHECK(a.record.held_out.macro_f1 == b.record.held_out.macro_f1);
        CHECK(strip_wall(record_a) == strip_wall(record_b));
    }
}

TEST_CASE("predict writes rows in input order and survives empty text") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    for (ModelKind kind : {ModelKind::LogReg, ModelKind::SvmCascade, ModelKind::BiLstm}) {
        CAPTURE(to_string(kind));
        PipelineConfig cfg = base_config(tmp, kind);
        std::ostringstream out;
        run_train(cfg, out);

        tmp.write("input.csv",
                  "id,text\np1,xin chào\np2,\"đồ ngu, quá\"\np3,\np4,ghét nó\np5,zzz www\n");
        const std::string pred_path = tmp.file(std::string("pred_") + to_string(kind) + ".csv");
        run_predict(cfg.output_dir, tmp.file("input.csv"), pred_path, out);

        const std::string content = testutil::slurp(pred_path);
        const auto records = parse_csv_records(content, pred_path);
        REQUIRE(records.size() == 6);
        CHECK(records[0] ==
              std::vector<std::string>{"id", "predicted", "score_clean", "score_offensive",
                                       "score_hate"});
        const char* expected_ids[] = {"p1", "p2", "p3", "p4", "p5"};
        for (size_t r = 1; r < records.size(); ++r) {
            CHECK(records[r][0] == expected_ids[r - 1]);
            const int label = std::stoi(records[r][1]);
            CHECK(label >= 0);
            CHECK(label <= 2);
            for (int c = 2; c < 5; ++c) CHECK(std::isfinite(std::stod(records[r][c])));
        }
        if (kind == ModelKind::LogReg || kind == ModelKind::BiLstm) {
            // probability rows sum to one
            for (size_t r = 1; r < records.size(); ++r) {
                const double sum = std::stod(records[r][2]) + std::stod(records[r][3]) +
                                   std::stod(records[r][4]);
                CHECK(std::abs(sum - 1.0) < 1e-9);
            }
        }
    }
}

TEST_CASE("predict refuses mismatched artifacts before writing output") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    PipelineConfig cfg = base_config(tmp, ModelKind::Gru);
    std::ostringstream out;
    run_train(cfg, out);

    // rewrite the vocab one token smaller so the checkpoint no longer matches
    const std::string vocab_path = cfg.output_dir + "/vocab.txt";
    Vocabulary shrunk = load_vocab(vocab_path);
    shrunk.token_to_id.erase(shrunk.id_to_token.back());
    shrunk.id_to_token.pop_back();
    save_vocab(vocab_path, shrunk);

    tmp.write("input.csv", "id,text\np1,xin chào\n");
    const std::string pred_path = tmp.file("pred.csv");
    CHECK_THROWS_AS(run_predict(cfg.output_dir, tmp.file("input.csv"), pred_path, out),
                    DataError);
    CHECK(!std::filesystem::exists(pred_path));
}

TEST_CASE("predict then eval reproduces the held-out report exactly") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    for (ModelKind kind : {ModelKind::LogReg, ModelKind::BiLstm}) {
        CAPTURE(to_string(kind));
        PipelineConfig cfg = base_config(tmp, kind);
        std::ostringstream out;
        const TrainOutcome outcome = run_train(cfg, out);

        const std::string pred_path = tmp.file("heldout_pred.csv");
        run_predict(cfg.output_dir, cfg.output_dir + "/held_out.csv", pred_path, out);
        std::ostringstream eval_out;
        const MetricsReport report = run_eval(cfg.output_dir + "/held_out.csv", pred_path, eval_out);

        CHECK(report.accuracy == outcome.record.held_out.accuracy);
        CHECK(report.macro_f1 == outcome.record.held_out.macro_f1);
        CHECK(report.weighted_f1 == outcome.record.held_out.weighted_f1);
        CHECK(report.confusion == outcome.record.held_out.confusion);
    }
}

TEST_CASE("run_eval joins on id and reports offenders") {
    testutil::TmpDir tmp;
    tmp.write("gold.csv", "id,text,label\na,x,0\nb,y,1\nc,z,2\nd,w,0\n");
    std::ostringstream out;

    SUBCASE("identical labels give accuracy 1") {
        tmp.write("pred.csv",
                  "id,predicted,score_clean,score_offensive,score_hate\n"
                  "a,0,1,0,0\nb,1,0,1,0\nc,2,0,0,1\nd,0,1,0,0\n");
        const MetricsReport m = run_eval(tmp.file("gold.csv"), tmp.file("pred.csv"), out);
        CHECK(m.accuracy == 1.0);
    }
    SUBCASE("the four-item worked example gives macro F1 7/9") {
        tmp.write("pred.csv",
                  "id,predicted,score_clean,score_offensive,score_hate\n"
                  "a,0,1,0,0\nb,1,0,1,0\nc,2,0,0,1\nd,1,0,1,0\n");
        // gold 0,1,2,0 / pred 0,1,2,1 == permutation of the worked example
        const MetricsReport m = run_eval(tmp.file("gold.csv"), tmp.file("pred.csv"), out);
        CHECK(m.macro_f1 == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
    }
    SUBCASE("disjoint ids error with the first offenders listed") {
        tmp.write("pred.csv",
                  "id,predicted,score_clean,score_offensive,score_hate\n"
                  "a,0,1,0,0\nq,1,0,1,0\n");
        CHECK_THROWS_WITH_AS(run_eval(tmp.file("gold.csv"), tmp.file("pred.csv"), out),
                             doctest::Contains("'b'"), DataError);
    }
    SUBCASE("bad predictions header") {
        tmp.write("pred.csv", "id,text\na,x\n");
        CHECK_THROWS_AS(run_eval(tmp.file("gold.csv"), tmp.file("pred.csv"), out), DataError);
    }
}

TEST_CASE("run_compare shares one split, ranks rows and tolerates failures") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());

    SUBCASE("two identical configs produce identical rows") {
        PipelineConfig a = base_config(tmp, ModelKind::Gru);
        a.output_dir = tmp.file("cmp1");
        PipelineConfig b = a;
        std::ostringstream out;
        const CompareOutcome outcome = run_compare({a, b}, false, out);
        REQUIRE(outcome.ranked.size() == 2);
        CHECK(outcome.failures == 0);
        CHECK(outcome.ranked[0].f1 == outcome.ranked[1].f1);
        CHECK(out.str().find("F1-Score") != std::string::npos);
    }
    SUBCASE("single config gives a single row") {
        PipelineConfig a = base_config(tmp, ModelKind::LogReg);
        a.output_dir = tmp.file("cmp2");
        std::ostringstream out;
        const CompareOutcome outcome = run_compare({a}, false, out);
        CHECK(outcome.ranked.size() == 1);
        CHECK(outcome.ranked[0].model == "LR");
    }
    SUBCASE("a model failure becomes a failed row") {
        // all-clean corpus: the cascade cannot train stage B
        std::string csv = "id,text,label\n";
        for (int i = 0; i < 10; ++i) csv += "c" + std::to_string(i) + ",xin chào,0\n";
        tmp.write("clean.csv", csv);
        PipelineConfig ok = base_config(tmp, ModelKind::LogReg);
        ok.train_csv = tmp.file("clean.csv");
        ok.output_dir = tmp.file("cmp3");
        PipelineConfig bad = ok;
        bad.model = ModelKind::SvmCascade;
        std::ostringstream out;
        const CompareOutcome outcome = run_compare({ok, bad}, false, out);
        REQUIRE(outcome.ranked.size() == 2);
        CHECK(outcome.failures == 1);
        CHECK(outcome.ranked[1].failed);
        CHECK(out.str().find("failed") != std::string::npos);
        CHECK_THROWS_AS(run_compare({}, false, out), ConfigError);
    }
}

TEST_CASE("pretrained embeddings feed the recurrent pipeline") {
    testutil::TmpDir tmp;
    tmp.write("train.csv", tiny_train_csv());
    tmp.write("emb.txt", "chào 0.1 0.2 0.3\nngu 0.4 0.5 0.6\n");
    PipelineConfig cfg = base_config(tmp, ModelKind::Lstm);
    cfg.embeddings = tmp.file("emb.txt");
    std::ostringstream out;
    const TrainOutcome outcome = run_train(cfg, out);
    CHECK(outcome.record.epoch_losses.size() == 3);
    CHECK(out.str().find("coverage") != std::string::npos);
    const CheckpointInfo info = read_checkpoint_info(cfg.output_dir + "/model.ckpt");
    CHECK(info.embed_dim == 3); // dim comes from the file
}
