#include "hsd/pipeline.hpp"

#include "hsd/errors.hpp"
#include "hsd/linear.hpp"
#include "hsd/tfidf.hpp"
#include "hsd/train.hpp"
#include "hsd/vocab.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace hsd {

namespace {

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + what + ": " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt_score(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<CleanText> texts_of(const std::vector<PreprocessedDocument>& docs) {
    std::vector<CleanText> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(d.text);
    return out;
}

std::array<std::int64_t, kNumClasses> label_counts(const std::vector<LabeledDocument>& docs) {
    std::array<std::int64_t, kNumClasses> counts{};
    for (const auto& d : docs)
        if (d.label) ++counts[static_cast<size_t>(label_code(*d.label))];
    return counts;
}

void write_manifest(const std::string& path, const PipelineConfig& cfg) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write pipeline manifest: " + path);
    out << "# trained pipeline manifest\n";
    out << "[artifact]\n";
    out << "model = " << to_string(cfg.model) << "\n";
    out << "max_len = " << cfg.max_len << "\n";
    out << "precision = " << (cfg.train.precision == PrecisionMode::Double ? "double" : "single")
        << "\n";
    out << "\n[preprocess]\n";
    out << "lowercase = " << (cfg.preprocess.lowercase ? "true" : "false") << "\n";
    out << "strip_urls = " << (cfg.preprocess.strip_urls ? "true" : "false") << "\n";
    out << "strip_mentions = " << (cfg.preprocess.strip_mentions ? "true" : "false") << "\n";
    out << "strip_non_alphabetic = " << (cfg.preprocess.strip_non_alphabetic ? "true" : "false")
        << "\n";
    out << "collapse_whitespace = " << (cfg.preprocess.collapse_whitespace ? "true" : "false")
        << "\n";
    out << "replace_empty = " << uni::encode_utf8(cfg.preprocess.replace_empty) << "\n";
    out << "stopwords =";
    for (const auto& w : cfg.preprocess.stopwords) out << " " << w;
    out << "\n";
}

struct Manifest {
    ModelKind model = ModelKind::BiLstm;
    int max_len = 100;
    PrecisionMode precision = PrecisionMode::Double;
    PreprocessConfig preprocess;
};

Manifest read_manifest(const std::string& dir) {
    const std::string path = dir + "/pipeline.txt";
    Manifest m;
    for (const IniEntry& e : parse_ini(read_file(path, "pipeline manifest"), path)) {
        if (e.section == "artifact") {
            if (e.key == "model") m.model = model_kind_from_string(e.value);
            else if (e.key == "max_len") m.max_len = std::atoi(e.value.c_str());
            else if (e.key == "precision")
                m.precision = e.value == "single" ? PrecisionMode::Single : PrecisionMode::Double;
        } else if (e.section == "preprocess") {
            if (e.key == "lowercase") m.preprocess.lowercase = e.value == "true";
            else if (e.key == "strip_urls") m.preprocess.strip_urls = e.value == "true";
            else if (e.key == "strip_mentions") m.preprocess.strip_mentions = e.value == "true";
            else if (e.key == "strip_non_alphabetic")
                m.preprocess.strip_non_alphabetic = e.value == "true";
            else if (e.key == "collapse_whitespace")
                m.preprocess.collapse_whitespace = e.value == "true";
            else if (e.key == "replace_empty") m.preprocess.replace_empty = uni::decode_utf8(e.value);
            else if (e.key == "stopwords") {
                std::istringstream ss(e.value);
                std::string w;
                while (ss >> w) m.preprocess.stopwords.insert(w);
            }
        }
    }
    if (m.max_len < 1) throw DataError(path + ": bad max_len");
    return m;
}

CellKind cell_of(ModelKind kind) { return kind == ModelKind::Gru ? CellKind::Gru : CellKind::Lstm; }
bool bidirectional_of(ModelKind kind) { return kind == ModelKind::BiLstm; }

} // namespace

namespace {

bool sniff_labeled_header(const std::string& content) {
    return content.rfind("id,text,label", 0) == 0 ||
           content.rfind("\xEF\xBB\xBFid,text,label", 0) == 0;
}

} // namespace

ClassDistribution run_stats(const PipelineConfig& cfg, std::ostream& out) {
    if (cfg.train_csv.empty()) throw ConfigError("stats: no train_csv configured");
    // An unlabeled file is parsed as such so class_stats can name the
    // offending ids.
    const std::string content = read_file(cfg.train_csv, "train csv");
    const auto docs = parse_csv(content, sniff_labeled_header(content), cfg.train_csv);
    const ClassDistribution dist = class_stats(docs);
    out << format_stats_table(dist);
    return dist;
}

namespace {

// Recurrent leg of training, templated on the numeric precision.
template <class Scalar>
RunRecord train_recurrent_leg(const PipelineConfig& cfg, const std::string& dir,
                              const std::vector<PreprocessedDocument>& pre_train,
                              const std::vector<PreprocessedDocument>& pre_val,
                              const std::optional<std::array<double, 3>>& cw, std::ostream& out) {
    Vocabulary vocab = build_vocab(texts_of(pre_train), cfg.min_freq, cfg.max_size);
    EmbeddingMatrix emb;
    if (!cfg.embeddings.empty()) {
        emb = load_embeddings(cfg.embeddings, vocab, std::nullopt, cfg.train.seed);
        out << "embeddings: dim " << emb.dim << ", coverage " << emb.coverage * 100.0 << "% of "
            << vocab.size() - 2 << " vocab tokens\n";
    } else {
        emb = init_random_embeddings(vocab, cfg.embed_dim, cfg.train.seed);
    }

    auto encode_all = [&](const std::vector<PreprocessedDocument>& docs) {
        std::vector<LabeledSequence> seqs;
        seqs.reserve(docs.size());
        for (const auto& d : docs) {
            if (!d.label) throw DataError("training requires labels; document '" + d.id + "' has none");
            seqs.push_back({encode(d.text, vocab, cfg.max_len), *d.label});
        }
        return seqs;
    };
    const std::vector<LabeledSequence> train_seqs = encode_all(pre_train);
    const std::vector<LabeledSequence> val_seqs = encode_all(pre_val);

    RecurrentClassifier<Scalar> model =
        init_recurrent<Scalar>(cell_of(cfg.model), cfg.hidden_size, emb, bidirectional_of(cfg.model),
                               cfg.pooling, cfg.trainable_embedding, cfg.train.seed);

    TrainConfig tc = cfg.train;
    tc.class_weights = cw;
    RunRecord record = train_recurrent(model, train_seqs, val_seqs.empty() ? nullptr : &val_seqs,
                                       tc, display_name(cfg.model));

    save_vocab(dir + "/vocab.txt", vocab);
    save_checkpoint(dir + "/model.ckpt", model);
    return record;
}

} // namespace

TrainOutcome run_train_on_split(const PipelineConfig& cfg, const DatasetSplit& split,
                                std::ostream& out) {
    if (split.train.empty()) throw DataError("train: empty training split");
    const auto t0 = std::chrono::steady_clock::now();

    const std::vector<PreprocessedDocument> pre_train = preprocess_corpus(split.train, cfg.preprocess);
    const std::vector<PreprocessedDocument> pre_val =
        preprocess_corpus(split.held_out, cfg.preprocess);
    const auto cw = cfg.resolve_class_weights(label_counts(split.train));

    const std::string dir = cfg.output_dir;
    fs::create_directories(dir);

    RunRecord record;
    if (cfg.is_linear()) {
        const TfidfModel tfidf = TfidfModel::fit(texts_of(pre_train), cfg.min_df);
        auto transform_all = [&](const std::vector<PreprocessedDocument>& docs,
                                 std::vector<SparseVector>& xs, std::vector<ClassLabel>& ys) {
            for (const auto& d : docs) {
                if (!d.label)
                    throw DataError("training requires labels; document '" + d.id + "' has none");
                xs.push_back(tfidf.transform(d.text));
                ys.push_back(*d.label);
            }
        };
        std::vector<SparseVector> x_train, x_val;
        std::vector<ClassLabel> y_train, y_val;
        transform_all(pre_train, x_train, y_train);
        transform_all(pre_val, x_val, y_val);

        LinearHyper hyper;
        hyper.lr = cfg.train.learning_rate;
        hyper.epochs = cfg.train.epochs;
        hyper.l2 = cfg.l2;
        hyper.seed = cfg.train.seed;
        hyper.batch_size = cfg.train.batch_size;

        std::vector<ClassLabel> preds;
        preds.reserve(x_val.size());
        if (cfg.model == ModelKind::LogReg) {
            hyper.class_weights = cw;
            LinearFitResult fit = train_logreg(x_train, y_train, hyper);
            for (const auto& x : x_val) preds.push_back(predict_linear(fit.model, x).first);
            save_linear(dir + "/linear.model", fit.model);
            record.epoch_losses = std::move(fit.epoch_losses);
        } else {
            CascadeFitResult fit = train_cascade(x_train, y_train, hyper);
            for (const auto& x : x_val) preds.push_back(cascade_predict(fit.model, x));
            save_cascade(dir + "/cascade.model", fit.model);
            record.epoch_losses = std::move(fit.epoch_losses);
        }
        tfidf.save(dir + "/tfidf.tsv");
        record.model_name = display_name(cfg.model);
        record.seed = cfg.train.seed;
        if (!y_val.empty()) record.held_out = evaluate(preds, y_val);
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
        record = cfg.train.precision == PrecisionMode::Double
                     ? train_recurrent_leg<double>(cfg, dir, pre_train, pre_val, cw, out)
                     : train_recurrent_leg<float>(cfg, dir, pre_train, pre_val, cw, out);
    }

    record.config_snapshot = cfg.snapshot();
    write_manifest(dir + "/pipeline.txt", cfg);
    write_csv(dir + "/held_out.csv", split.held_out, /*with_labels=*/true);
    save_run_record(dir + "/runrecord.txt", record);

    out << "model: " << record.model_name << ", train " << split.train.size() << " / held-out "
        << split.held_out.size() << " documents\n";
    if (!split.held_out.empty()) {
        out << format_metrics(record.held_out);
    } else {
        out << "held-out split is empty; no evaluation\n";
    }
    out << "artifacts written to " << dir << "\n";
    return {std::move(record), dir};
}

TrainOutcome run_train(const PipelineConfig& cfg, std::ostream& out) {
    if (cfg.train_csv.empty()) throw ConfigError("train: no train_csv configured");
    const auto docs = load_csv(cfg.train_csv, /*has_labels=*/true);
    const DatasetSplit split =
        split_dataset(docs, cfg.split_ratio, cfg.train.seed, cfg.stratified);
    return run_train_on_split(cfg, split, out);
}

void run_predict(const std::string& model_dir, const std::string& input_csv,
                 const std::string& output_csv, std::ostream& out) {
    const Manifest manifest = read_manifest(model_dir);

    // Accept both labeled and unlabeled inputs; labels are ignored.
    const std::string content = read_file(input_csv, "input csv");
    const std::vector<LabeledDocument> docs =
        parse_csv(content, sniff_labeled_header(content), input_csv);

    std::vector<std::pair<ClassLabel, Eigen::Vector3d>> results;
    results.reserve(docs.size());

    if (manifest.model == ModelKind::LogReg || manifest.model == ModelKind::SvmCascade) {
        const TfidfModel tfidf = TfidfModel::load(model_dir + "/tfidf.tsv");
        if (manifest.model == ModelKind::LogReg) {
            const LinearModel model = load_linear(model_dir + "/linear.model");
            if (model.num_features() != tfidf.num_features())
                throw DataError("predict: linear model (" + std::to_string(model.num_features()) +
                                " features) does not match tfidf model (" +
                                std::to_string(tfidf.num_features()) + ")");
            for (const auto& d : docs)
                results.push_back(predict_linear(model, tfidf.transform(normalize(d.text, manifest.preprocess))));
        } else {
            const CascadeModel model = load_cascade(model_dir + "/cascade.model");
            if (model.stage_a.num_features() != tfidf.num_features())
                throw DataError("predict: cascade model (" +
                                std::to_string(model.stage_a.num_features()) +
                                " features) does not match tfidf model (" +
                                std::to_string(tfidf.num_features()) + ")");
            for (const auto& d : docs) {
                const SparseVector x = tfidf.transform(normalize(d.text, manifest.preprocess));
                results.emplace_back(cascade_predict(model, x), cascade_scores(model, x));
            }
        }
    } else {
        const Vocabulary vocab = load_vocab(model_dir + "/vocab.txt");
        const CheckpointInfo info = read_checkpoint_info(model_dir + "/model.ckpt");
        if (info.vocab != vocab.size())
            throw DataError("predict: checkpoint vocab size " + std::to_string(info.vocab) +
                            " does not match vocab file (" + std::to_string(vocab.size()) + ")");
        if (info.cell_kind != cell_of(manifest.model) ||
            info.bidirectional != bidirectional_of(manifest.model))
            throw DataError("predict: checkpoint architecture does not match manifest model '" +
                            std::string(to_string(manifest.model)) + "'");
        auto predict_all = [&](auto& model) {
            for (const auto& d : docs)
                results.push_back(predict_recurrent(
                    model, encode(normalize(d.text, manifest.preprocess), vocab, manifest.max_len)));
        };
        if (manifest.precision == PrecisionMode::Double) {
            const RecurrentClassifier<double> model = load_checkpoint<double>(model_dir + "/model.ckpt");
            predict_all(model);
        } else {
            const RecurrentClassifier<float> model = load_checkpoint<float>(model_dir + "/model.ckpt");
            predict_all(model);
        }
    }

    std::ofstream os(output_csv, std::ios::binary);
    if (!os) throw DataError("cannot write predictions csv: " + output_csv);
    os << "id,predicted,score_clean,score_offensive,score_hate\n";
    for (size_t i = 0; i < docs.size(); ++i) {
        const auto& [label, scores] = results[i];
        os << csv_escape_field(docs[i].id) << "," << label_code(label);
        for (int c = 0; c < kNumClasses; ++c) os << "," << fmt_score(scores[c]);
        os << "\n";
    }
    out << "wrote " << docs.size() << " predictions to " << output_csv << "\n";
}

MetricsReport run_eval(const std::string& gold_csv, const std::string& predictions_csv,
                       std::ostream& out) {
    const std::vector<LabeledDocument> gold = load_csv(gold_csv, /*has_labels=*/true);

    const std::string content = read_file(predictions_csv, "predictions csv");
    const auto records = parse_csv_records(content, predictions_csv);
    if (records.empty() || records[0].empty() || records[0][0] != "id" ||
        records[0].size() < 2 || records[0][1] != "predicted")
        throw DataError(predictions_csv + ": expected header beginning 'id,predicted'");

    std::map<std::string, ClassLabel> predicted;
    for (size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != records[0].size())
            throw DataError(predictions_csv + ": row " + std::to_string(r + 1) +
                            ": wrong column count");
        if (!predicted.emplace(records[r][0], parse_label(records[r][1])).second)
            throw DataError(predictions_csv + ": duplicate id '" + records[r][0] + "'");
    }

    std::vector<std::string> offenders;
    std::set<std::string> gold_ids;
    for (const auto& d : gold) {
        gold_ids.insert(d.id);
        if (!predicted.count(d.id)) offenders.push_back("missing prediction for '" + d.id + "'");
    }
    for (const auto& [id, _] : predicted)
        if (!gold_ids.count(id)) offenders.push_back("prediction for unknown id '" + id + "'");
    if (!offenders.empty()) {
        std::string msg = "eval: id sets do not match:";
        for (size_t i = 0; i < offenders.size() && i < 5; ++i) msg += "\n  " + offenders[i];
        if (offenders.size() > 5)
            msg += "\n  ... (" + std::to_string(offenders.size()) + " offenders total)";
        throw DataError(msg);
    }

    std::vector<ClassLabel> pred_vec, gold_vec;
    for (const auto& d : gold) {
        pred_vec.push_back(predicted.at(d.id));
        gold_vec.push_back(*d.label);
    }
    const MetricsReport report = evaluate(pred_vec, gold_vec);
    out << format_metrics(report);
    return report;
}

CompareOutcome run_compare(const std::vector<PipelineConfig>& configs, bool rank_weighted,
                           std::ostream& out) {
    if (configs.empty()) throw ConfigError("compare: at least one config required");
    for (const auto& cfg : configs)
        if (cfg.train_csv != configs[0].train_csv)
            throw ConfigError("compare: all configs must share the same train_csv");

    const auto docs = load_csv(configs[0].train_csv, /*has_labels=*/true);
    const DatasetSplit split = split_dataset(docs, configs[0].split_ratio, configs[0].train.seed,
                                             configs[0].stratified);

    CompareOutcome outcome;
    std::vector<ComparisonRow> rows;
    for (const auto& cfg : configs) {
        PipelineConfig model_cfg = cfg;
        model_cfg.output_dir = cfg.output_dir + "/" + to_string(cfg.model);
        ComparisonRow row;
        row.model = display_name(cfg.model);
        out << "=== " << row.model << "\n";
        try {
            TrainOutcome t = run_train_on_split(model_cfg, split, out);
            row.f1 = rank_weighted ? t.record.held_out.weighted_f1 : t.record.held_out.macro_f1;
            outcome.records.push_back(std::move(t.record));
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
            ++outcome.failures;
            out << "failed: " << e.what() << "\n";
        }
        rows.push_back(std::move(row));
    }

    outcome.ranked = rank_runs(rows);
    out << "\nRanked by " << (rank_weighted ? "weighted" : "macro") << " F1 on the shared "
        << split.held_out.size() << "-document held-out split:\n";
    out << format_comparison(outcome.ranked);
    return outcome;
}

} // namespace hsd
