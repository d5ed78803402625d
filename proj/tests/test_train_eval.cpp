#include "hsd/train.hpp"

#include "support/corpora.hpp"
#include "support/metrics_reference.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

using namespace hsd;

namespace {

EmbeddingMatrix make_embedding(int vocab, int dim, std::uint64_t seed) {
    EmbeddingMatrix emb;
    emb.dim = dim;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(-0.5, 0.5);
    emb.matrix = Eigen::MatrixXd::Zero(vocab, dim);
    for (int r = 1; r < vocab; ++r)
        for (int c = 0; c < dim; ++c) emb.matrix(r, c) = val(rng);
    return emb;
}

TokenSequence seq_of(std::vector<int> ids, int max_len) {
    TokenSequence s;
    s.true_length = static_cast<int>(ids.size());
    ids.resize(static_cast<size_t>(max_len), Vocabulary::pad_id);
    s.ids = std::move(ids);
    return s;
}

std::vector<LabeledSequence> toy_dataset(int n, int vocab, int max_len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<LabeledSequence> data;
    for (int i = 0; i < n; ++i) {
        std::vector<int> ids;
        const int len = 1 + static_cast<int>(rng() % (max_len - 1));
        for (int t = 0; t < len; ++t) ids.push_back(2 + static_cast<int>(rng() % (vocab - 2)));
        data.push_back({seq_of(ids, max_len), label_from_code(static_cast<int>(rng() % 3))});
    }
    return data;
}

std::vector<ClassLabel> random_labels(std::mt19937_64& rng, size_t n) {
    std::vector<ClassLabel> out;
    for (size_t i = 0; i < n; ++i) out.push_back(label_from_code(static_cast<int>(rng() % 3)));
    return out;
}

} // namespace

TEST_CASE("cross_entropy worked examples") {
    const Eigen::Vector3d uniform(1.0 / 3, 1.0 / 3, 1.0 / 3);
    CHECK(cross_entropy(uniform, ClassLabel::Clean) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(cross_entropy(uniform, ClassLabel::Clean) == doctest::Approx(1.098612).epsilon(1e-6));
    CHECK(cross_entropy(Eigen::Vector3d(0.0, 1.0, 0.0), ClassLabel::Offensive) == 0.0);
    CHECK(cross_entropy(uniform, ClassLabel::Hate, 2.0) ==
          doctest::Approx(2.0 * cross_entropy(uniform, ClassLabel::Hate)).epsilon(1e-12));
    // clamped at p >= 1e-12
    CHECK(std::isfinite(cross_entropy(Eigen::Vector3d(1.0, 0.0, 0.0), ClassLabel::Hate)));
}

TEST_CASE("sgd step arithmetic") {
    EmbeddingMatrix emb = make_embedding(4, 2, 61);
    RecurrentClassifier<double> model =
        init_recurrent<double>(CellKind::Gru, 2, emb, false, Pooling::FinalState, true, 62);
    TrainConfig cfg;
    cfg.optimizer = OptimizerKind::Sgd;
    cfg.learning_rate = 0.1;
    OptimizerState<double> state = make_optimizer(model, cfg);

    model.params.head_b[0] = 1.0;
    GradientSet<double> grads = make_gradient_set(model);
    grads.head_b[0] = 0.5;
    optimizer_step(model, grads, state);
    CHECK(model.params.head_b[0] == doctest::Approx(0.95).epsilon(1e-15));
}

TEST_CASE("adam first step magnitude is the learning rate") {
    EmbeddingMatrix emb = make_embedding(4, 2, 63);
    RecurrentClassifier<double> model =
        init_recurrent<double>(CellKind::Gru, 2, emb, false, Pooling::FinalState, true, 64);
    TrainConfig cfg;
    cfg.optimizer = OptimizerKind::Adam;
    cfg.learning_rate = 0.01;
    OptimizerState<double> state = make_optimizer(model, cfg);

    const double before = model.params.head_b[1];
    GradientSet<double> grads = make_gradient_set(model);
    grads.head_b[1] = 1.0;
    optimizer_step(model, grads, state);
    // scalar oracle: m_hat = 1, v_hat = 1 -> step = lr / (1 + eps)
    const double expected = 0.01 / (1.0 + cfg.adam.epsilon);
    CHECK(before - model.params.head_b[1] == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs((before - model.params.head_b[1]) - 0.01) < 1e-9);
}

TEST_CASE("zero gradients are a fixed point of both optimizers") {
    for (OptimizerKind kind : {OptimizerKind::Sgd, OptimizerKind::Adam}) {
        EmbeddingMatrix emb = make_embedding(4, 2, 65);
        RecurrentClassifier<double> model =
            init_recurrent<double>(CellKind::Lstm, 2, emb, true, Pooling::FinalState, true, 66);
        const RecurrentParams<double> before = model.params;
        TrainConfig cfg;
        cfg.optimizer = kind;
        OptimizerState<double> state = make_optimizer(model, cfg);
        GradientSet<double> grads = make_gradient_set(model);
        optimizer_step(model, grads, state);
        bool unchanged = true;
        for_each_tensor(
            model, true,
            [&](const std::string&, const auto& a, const auto& b) {
                if (!(a == b)) unchanged = false;
            },
            model.params, before);
        CHECK(unchanged);
    }
}

TEST_CASE("non-finite gradients abort naming the tensor") {
    EmbeddingMatrix emb = make_embedding(4, 2, 67);
    RecurrentClassifier<double> model =
        init_recurrent<double>(CellKind::Gru, 2, emb, false, Pooling::FinalState, true, 68);
    TrainConfig cfg;
    OptimizerState<double> state = make_optimizer(model, cfg);
    GradientSet<double> grads = make_gradient_set(model);
    grads.head_w(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(optimizer_step(model, grads, state), doctest::Contains("head_w"),
                         NumericError);
}

TEST_CASE("train with zero learning rate is an exact no-op on parameters") {
    const auto data = toy_dataset(12, 6, 5, 69);
    EmbeddingMatrix emb = make_embedding(6, 3, 70);
    for (OptimizerKind kind : {OptimizerKind::Sgd, OptimizerKind::Adam}) {
        RecurrentClassifier<double> model =
            init_recurrent<double>(CellKind::Lstm, 2, emb, true, Pooling::FinalState, true, 71);
        const RecurrentParams<double> before = model.params;
        TrainConfig cfg;
        cfg.optimizer = kind;
        cfg.learning_rate = 0.0;
        cfg.epochs = 2;
        const RunRecord record = train_recurrent(model, data, nullptr, cfg, "noop");
        CHECK(record.epoch_losses.size() == 2);
        CHECK(record.epoch_losses[0] == record.epoch_losses[1]);
        bool unchanged = true;
        for_each_tensor(
            model, true,
            [&](const std::string&, const auto& a, const auto& b) {
                if (!(a == b)) unchanged = false;
            },
            model.params, before);
        CHECK(unchanged);
    }
}

TEST_CASE("training is bitwise deterministic in double precision") {
    const auto data = toy_dataset(24, 8, 6, 72);
    const auto val = toy_dataset(10, 8, 6, 73);
    EmbeddingMatrix emb = make_embedding(8, 3, 74);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 5;
    cfg.seed = 99;

    auto run = [&]() {
        RecurrentClassifier<double> model =
            init_recurrent<double>(CellKind::Gru, 3, emb, true, Pooling::MeanOverTime, true, 75);
        return train_recurrent(model, data, &val, cfg, "det");
    };
    const RunRecord a = run();
    const RunRecord b = run();
    REQUIRE(a.epoch_losses.size() == b.epoch_losses.size());
    for (size_t e = 0; e < a.epoch_losses.size(); ++e)
        CHECK(a.epoch_losses[e] == b.epoch_losses[e]); // bitwise
    CHECK(a.held_out.accuracy == b.held_out.accuracy);
    CHECK(a.held_out.macro_f1 == b.held_out.macro_f1);
    CHECK(a.held_out.confusion == b.held_out.confusion);
}

TEST_CASE("early stopping with a saturated metric stops after the patience window") {
    const auto data = toy_dataset(12, 6, 5, 76);
    const auto val = toy_dataset(6, 6, 5, 77);
    EmbeddingMatrix emb = make_embedding(6, 3, 78);
    RecurrentClassifier<double> model =
        init_recurrent<double>(CellKind::Gru, 2, emb, false, Pooling::FinalState, true, 79);
    TrainConfig cfg;
    cfg.learning_rate = 0.0; // metric can never improve after the first epoch
    cfg.epochs = 50;
    cfg.early_stop_patience = 2;
    const RunRecord record = train_recurrent(model, data, &val, cfg, "es");
    CHECK(record.epoch_losses.size() == 3); // 1 best epoch + 2 patience epochs
}

TEST_CASE("evaluate worked examples") {
    SUBCASE("perfect prediction") {
        const std::vector<ClassLabel> gold = {ClassLabel::Clean, ClassLabel::Offensive,
                                              ClassLabel::Hate};
        const MetricsReport m = evaluate(gold, gold);
        CHECK(m.accuracy == 1.0);
        CHECK(m.macro_f1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.weighted_f1 == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("the four-item confusion oracle") {
        const std::vector<ClassLabel> gold = {ClassLabel::Clean, ClassLabel::Clean,
                                              ClassLabel::Offensive, ClassLabel::Hate};
        const std::vector<ClassLabel> pred = {ClassLabel::Clean, ClassLabel::Offensive,
                                              ClassLabel::Offensive, ClassLabel::Hate};
        const MetricsReport m = evaluate(pred, gold);
        CHECK(m.accuracy == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(m.per_class[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(m.per_class[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(m.per_class[2].f1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.macro_f1 == doctest::Approx(7.0 / 9.0).epsilon(1e-12));
        CHECK(m.confusion[0][0] == 1);
        CHECK(m.confusion[0][1] == 1);
        CHECK(m.confusion[1][1] == 1);
        CHECK(m.confusion[2][2] == 1);
    }
    SUBCASE("majority-class predictions on the published distribution") {
        std::vector<ClassLabel> gold, pred;
        auto add = [&](int n, ClassLabel l) {
            for (int i = 0; i < n; ++i) {
                gold.push_back(l);
                pred.push_back(ClassLabel::Clean);
            }
        };
        add(18614, ClassLabel::Clean);
        add(1022, ClassLabel::Offensive);
        add(709, ClassLabel::Hate);
        const MetricsReport m = evaluate(pred, gold);
        const double p_clean = 18614.0 / 20345.0;
        CHECK(m.accuracy == doctest::Approx(p_clean).epsilon(1e-12));
        CHECK(m.accuracy == doctest::Approx(0.9149).epsilon(1e-4));
        const double f1_clean = 2.0 * p_clean / (1.0 + p_clean);
        CHECK(m.macro_f1 == doctest::Approx(f1_clean / 3.0).epsilon(1e-12));
        CHECK(m.macro_f1 == doctest::Approx(0.3185).epsilon(1e-3));
        CHECK(m.warnings.size() == 2); // two 0/0 precision classes
    }
    SUBCASE("length mismatch and empty input error") {
        CHECK_THROWS_AS(evaluate({ClassLabel::Clean}, {}), DataError);
        CHECK_THROWS_AS(evaluate({ClassLabel::Clean},
                                 {ClassLabel::Clean, ClassLabel::Hate}),
                        DataError);
        CHECK_THROWS_AS(evaluate({}, {}), DataError);
    }
}

TEST_CASE("evaluate matches the brute-force reference on 1000 fuzzed cases") {
    std::mt19937_64 rng(81);
    for (int iter = 0; iter < 1000; ++iter) {
        const size_t n = 1 + rng() % 40;
        const auto gold = random_labels(rng, n);
        const auto pred = random_labels(rng, n);
        const MetricsReport m = evaluate(pred, gold);
        const auto ref = testutil::MetricsReference::compute(pred, gold);
        for (int g = 0; g < 3; ++g)
            for (int p = 0; p < 3; ++p) CHECK(m.confusion[g][p] == ref.confusion[g][p]);
        CHECK(std::abs(m.accuracy - ref.accuracy) < 1e-12);
        CHECK(std::abs(m.macro_f1 - ref.macro_f1) < 1e-12);
        CHECK(std::abs(m.weighted_f1 - ref.weighted_f1) < 1e-12);
        for (int c = 0; c < 3; ++c) {
            CHECK(std::abs(m.per_class[c].precision - ref.precision[c]) < 1e-12);
            CHECK(std::abs(m.per_class[c].recall - ref.recall[c]) < 1e-12);
            CHECK(std::abs(m.per_class[c].f1 - ref.f1[c]) < 1e-12);
        }
    }
}

TEST_CASE("macro F1 is invariant under joint label permutation") {
    std::mt19937_64 rng(82);
    const std::array<std::array<int, 3>, 6> perms = {
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int iter = 0; iter < 100; ++iter) {
        const size_t n = 1 + rng() % 30;
        const auto gold = random_labels(rng, n);
        const auto pred = random_labels(rng, n);
        const double base = evaluate(pred, gold).macro_f1;
        for (const auto& perm : perms) {
            std::vector<ClassLabel> pg, pp;
            for (size_t i = 0; i < n; ++i) {
                pg.push_back(label_from_code(perm[static_cast<size_t>(label_code(gold[i]))]));
                pp.push_back(label_from_code(perm[static_cast<size_t>(label_code(pred[i]))]));
            }
            CHECK(evaluate(pp, pg).macro_f1 == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("weighted F1 lies between the min and max per-class F1") {
    std::mt19937_64 rng(83);
    for (int iter = 0; iter < 200; ++iter) {
        const size_t n = 1 + rng() % 30;
        const auto gold = random_labels(rng, n);
        const auto pred = random_labels(rng, n);
        const MetricsReport m = evaluate(pred, gold);
        double lo = 1.0, hi = 0.0;
        for (int c = 0; c < 3; ++c) {
            lo = std::min(lo, m.per_class[c].f1);
            hi = std::max(hi, m.per_class[c].f1);
        }
        CHECK(m.weighted_f1 >= lo - 1e-12);
        CHECK(m.weighted_f1 <= hi + 1e-12);
    }
}

TEST_CASE("comparison table ranks the published scores") {
    auto rec = [](const char* name, double f1) {
        RunRecord r;
        r.model_name = name;
        r.held_out.macro_f1 = f1;
        return r;
    };
    const std::vector<RunRecord> records = {rec("SVM", 0.6387), rec("LR", 0.5115),
                                            rec("GRU", 0.6501), rec("Bi-LSTM", 0.7143)};
    const auto ranked = rank_records(records);
    REQUIRE(ranked.size() == 4);
    CHECK(ranked[0].model == "Bi-LSTM");
    CHECK(ranked[1].model == "GRU");
    CHECK(ranked[2].model == "SVM");
    CHECK(ranked[3].model == "LR");

    const std::string table = format_comparison(ranked);
    CHECK(table.find("Model") != std::string::npos);
    CHECK(table.find("F1-Score") != std::string::npos);
    CHECK(table.find("71.43") != std::string::npos);
    CHECK(table.find("63.87") != std::string::npos);
    CHECK(table.find("Bi-LSTM") < table.find("GRU"));
    CHECK(table.find("GRU") < table.find("SVM"));
    // SVM appears after GRU, LR last
    CHECK(table.rfind("LR") > table.find("SVM"));
}

TEST_CASE("comparison handles single rows and ties") {
    auto rec = [](const char* name, double f1) {
        RunRecord r;
        r.model_name = name;
        r.held_out.macro_f1 = f1;
        return r;
    };
    const auto single = rank_records({rec("GRU", 0.5)});
    CHECK(single.size() == 1);
    CHECK(format_comparison(single).find("GRU") != std::string::npos);

    const auto tied = rank_records({rec("zeta", 0.5), rec("alpha", 0.5)});
    CHECK(tied[0].model == "alpha"); // stable order by model name
    CHECK(tied[1].model == "zeta");

    std::vector<ComparisonRow> with_failure = {{"ok", 0.4, false, ""}, {"bad", 0.0, true, "boom"}};
    const auto ranked = rank_runs(with_failure);
    CHECK(ranked[0].model == "ok");
    CHECK(ranked[1].failed);
    CHECK(format_comparison(ranked).find("failed") != std::string::npos);
}

TEST_CASE("run records serialize every reproducible field") {
    RunRecord r;
    r.model_name = "GRU";
    r.seed = 7;
    r.epoch_losses = {1.5, 0.75};
    r.held_out.accuracy = 0.5;
    r.wall_seconds = 12.25;
    r.config_snapshot = {{"train.epochs", "2"}};
    const std::string text = format_run_record(r);
    CHECK(text.find("model = GRU") != std::string::npos);
    CHECK(text.find("seed = 7") != std::string::npos);
    CHECK(text.find("loss_epoch_1 = 1.5") != std::string::npos);
    CHECK(text.find("loss_epoch_2 = 0.75") != std::string::npos);
    CHECK(text.find("config.train.epochs = 2") != std::string::npos);
    CHECK(text.find("wall_clock_seconds") != std::string::npos);
}

TEST_CASE("a bidirectional lstm learns a tiny order task end to end") {
    // Scaled-down view of the order-separation acceptance run.
    const auto docs = testutil::make_order_corpus(160, 5, /*sentence_len=*/5, /*filler_pool=*/8);
    Vocabulary vocab;
    {
        std::vector<CleanText> texts;
        for (const auto& d : docs) {
            CleanText t;
            std::istringstream ss(d.text);
            std::string tok;
            while (ss >> tok) t.tokens.push_back(tok);
            texts.push_back(t);
        }
        vocab = build_vocab(texts, 1);
    }
    auto to_seqs = [&](size_t lo, size_t hi) {
        std::vector<LabeledSequence> out;
        for (size_t i = lo; i < hi; ++i) {
            CleanText t;
            std::istringstream ss(docs[i].text);
            std::string tok;
            while (ss >> tok) t.tokens.push_back(tok);
            out.push_back({encode(t, vocab, 6), *docs[i].label});
        }
        return out;
    };
    const auto train_set = to_seqs(0, 120);
    const auto test_set = to_seqs(120, 160);

    EmbeddingMatrix emb = init_random_embeddings(vocab, 12, 3);
    RecurrentClassifier<double> model =
        init_recurrent<double>(CellKind::Lstm, 16, emb, true, Pooling::FinalState, true, 4);
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = 16;
    cfg.learning_rate = 0.01;
    cfg.seed = 5;
    const RunRecord record = train_recurrent(model, train_set, &test_set, cfg, "Bi-LSTM");
    CHECK(record.held_out.accuracy >= 0.9);
    CHECK(record.epoch_losses.front() > record.epoch_losses.back());
}
