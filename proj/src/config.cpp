#include "hsd/config.hpp"
#include "hsd/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hsd {

const char* to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::LogReg: return "lr";
    case ModelKind::SvmCascade: return "svm_cascade";
    case ModelKind::Gru: return "gru";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::BiLstm: return "bilstm";
    }
    return "?";
}

const char* display_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::LogReg: return "LR";
    case ModelKind::SvmCascade: return "SVM";
    case ModelKind::Gru: return "GRU";
    case ModelKind::Lstm: return "LSTM";
    case ModelKind::BiLstm: return "Bi-LSTM";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "lr") return ModelKind::LogReg;
    if (s == "svm_cascade") return ModelKind::SvmCascade;
    if (s == "gru") return ModelKind::Gru;
    if (s == "lstm") return ModelKind::Lstm;
    if (s == "bilstm") return ModelKind::BiLstm;
    throw ConfigError("unknown model kind '" + s + "' (expected lr, svm_cascade, gru, lstm, bilstm)");
}

namespace {

std::string trim(const std::string& s) {
    const size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& value, const std::string& where) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(where + ": expected a boolean, got '" + value + "'");
}

int parse_int(const std::string& value, const std::string& where) {
    char* end = nullptr;
    const long v = std::strtol(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError(where + ": expected an integer, got '" + value + "'");
    return static_cast<int>(v);
}

double parse_double(const std::string& value, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ConfigError(where + ": expected a number, got '" + value + "'");
    return v;
}

} // namespace

std::vector<IniEntry> parse_ini(const std::string& content, const std::string& origin) {
    std::vector<IniEntry> entries;
    std::istringstream in(content);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(origin + ": line " + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ": line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        IniEntry e;
        e.section = section;
        e.key = trim(t.substr(0, eq));
        e.value = trim(t.substr(eq + 1));
        if (e.key.empty())
            throw ConfigError(origin + ": line " + std::to_string(line_no) + ": empty key");
        entries.push_back(std::move(e));
    }
    return entries;
}

PipelineConfig PipelineConfig::parse(const std::string& content, const std::string& origin) {
    PipelineConfig cfg;
    for (const IniEntry& e : parse_ini(content, origin)) {
        const std::string where = origin + ": [" + e.section + "] " + e.key;
        if (e.section == "paths") {
            if (e.key == "train_csv") cfg.train_csv = e.value;
            else if (e.key == "eval_csv") cfg.eval_csv = e.value;
            else if (e.key == "embeddings") cfg.embeddings = e.value;
            else if (e.key == "stopwords") cfg.stopwords = e.value;
            else if (e.key == "output_dir") cfg.output_dir = e.value;
            else throw ConfigError(where + ": unknown key");
        } else if (e.section == "preprocess") {
            if (e.key == "lowercase") cfg.preprocess.lowercase = parse_bool(e.value, where);
            else if (e.key == "strip_urls") cfg.preprocess.strip_urls = parse_bool(e.value, where);
            else if (e.key == "strip_mentions")
                cfg.preprocess.strip_mentions = parse_bool(e.value, where);
            else if (e.key == "strip_non_alphabetic")
                cfg.preprocess.strip_non_alphabetic = parse_bool(e.value, where);
            else if (e.key == "collapse_whitespace")
                cfg.preprocess.collapse_whitespace = parse_bool(e.value, where);
            else if (e.key == "replace_empty")
                cfg.preprocess.replace_empty = uni::decode_utf8(e.value);
            else throw ConfigError(where + ": unknown key");
        } else if (e.section == "vocab") {
            if (e.key == "min_freq") cfg.min_freq = parse_int(e.value, where);
            else if (e.key == "max_size") {
                const int v = parse_int(e.value, where);
                cfg.max_size = v > 0 ? std::optional<int>(v) : std::nullopt;
            } else if (e.key == "max_len") cfg.max_len = parse_int(e.value, where);
            else throw ConfigError(where + ": unknown key");
        } else if (e.section == "model") {
            if (e.key == "kind") cfg.model = model_kind_from_string(e.value);
            else if (e.key == "hidden_size") cfg.hidden_size = parse_int(e.value, where);
            else if (e.key == "embed_dim") cfg.embed_dim = parse_int(e.value, where);
            else if (e.key == "trainable_embedding")
                cfg.trainable_embedding = parse_bool(e.value, where);
            else if (e.key == "pooling") cfg.pooling = pooling_from_string(e.value);
            else if (e.key == "l2") cfg.l2 = parse_double(e.value, where);
            else if (e.key == "min_df") cfg.min_df = parse_int(e.value, where);
            else throw ConfigError(where + ": unknown key");
        } else if (e.section == "train") {
            if (e.key == "epochs") cfg.train.epochs = parse_int(e.value, where);
            else if (e.key == "batch_size") cfg.train.batch_size = parse_int(e.value, where);
            else if (e.key == "learning_rate") cfg.train.learning_rate = parse_double(e.value, where);
            else if (e.key == "optimizer") {
                if (e.value == "sgd") cfg.train.optimizer = OptimizerKind::Sgd;
                else if (e.value == "adam") cfg.train.optimizer = OptimizerKind::Adam;
                else throw ConfigError(where + ": expected sgd or adam");
            } else if (e.key == "adam_beta1") cfg.train.adam.beta1 = parse_double(e.value, where);
            else if (e.key == "adam_beta2") cfg.train.adam.beta2 = parse_double(e.value, where);
            else if (e.key == "adam_epsilon") cfg.train.adam.epsilon = parse_double(e.value, where);
            else if (e.key == "seed")
                cfg.train.seed = static_cast<std::uint64_t>(std::strtoull(e.value.c_str(), nullptr, 10));
            else if (e.key == "class_weights") cfg.class_weights_spec = e.value;
            else if (e.key == "early_stop_patience") {
                const int v = parse_int(e.value, where);
                cfg.train.early_stop_patience = v > 0 ? std::optional<int>(v) : std::nullopt;
            } else if (e.key == "precision") {
                if (e.value == "double") cfg.train.precision = PrecisionMode::Double;
                else if (e.value == "single") cfg.train.precision = PrecisionMode::Single;
                else throw ConfigError(where + ": expected double or single");
            } else if (e.key == "split_ratio") cfg.split_ratio = parse_double(e.value, where);
            else if (e.key == "stratified") cfg.stratified = parse_bool(e.value, where);
            else throw ConfigError(where + ": unknown key");
        } else {
            throw ConfigError(origin + ": unknown section [" + e.section + "]");
        }
    }
    if (!cfg.stopwords.empty()) {
        cfg.preprocess.stopwords = load_stopwords(cfg.stopwords);
        cfg.preprocess.canonicalize();
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    PipelineConfig cfg = parse(ss.str(), path);
    cfg.check_paths();
    return cfg;
}

void PipelineConfig::check_paths() const {
    for (const std::string* p : {&train_csv, &eval_csv, &embeddings, &stopwords}) {
        if (!p->empty() && !std::filesystem::exists(*p))
            throw ConfigError("configured path does not exist: " + *p);
    }
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::snapshot() const {
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%g", v);
        return std::string(buf);
    };
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("model.kind", to_string(model));
    kv.emplace_back("paths.train_csv", train_csv);
    if (!eval_csv.empty()) kv.emplace_back("paths.eval_csv", eval_csv);
    if (!embeddings.empty()) kv.emplace_back("paths.embeddings", embeddings);
    if (!stopwords.empty()) kv.emplace_back("paths.stopwords", stopwords);
    kv.emplace_back("preprocess.lowercase", preprocess.lowercase ? "true" : "false");
    kv.emplace_back("preprocess.strip_urls", preprocess.strip_urls ? "true" : "false");
    kv.emplace_back("preprocess.strip_mentions", preprocess.strip_mentions ? "true" : "false");
    kv.emplace_back("preprocess.strip_non_alphabetic",
                    preprocess.strip_non_alphabetic ? "true" : "false");
    kv.emplace_back("preprocess.replace_empty", uni::encode_utf8(preprocess.replace_empty));
    kv.emplace_back("vocab.min_freq", std::to_string(min_freq));
    kv.emplace_back("vocab.max_size", max_size ? std::to_string(*max_size) : "0");
    kv.emplace_back("vocab.max_len", std::to_string(max_len));
    if (is_linear()) {
        kv.emplace_back("model.l2", num(l2));
        kv.emplace_back("model.min_df", std::to_string(min_df));
    } else {
        kv.emplace_back("model.hidden_size", std::to_string(hidden_size));
        kv.emplace_back("model.embed_dim", std::to_string(embed_dim));
        kv.emplace_back("model.trainable_embedding", trainable_embedding ? "true" : "false");
        kv.emplace_back("model.pooling", to_string(pooling));
    }
    kv.emplace_back("train.epochs", std::to_string(train.epochs));
    kv.emplace_back("train.batch_size", std::to_string(train.batch_size));
    kv.emplace_back("train.learning_rate", num(train.learning_rate));
    kv.emplace_back("train.optimizer", train.optimizer == OptimizerKind::Adam ? "adam" : "sgd");
    if (train.optimizer == OptimizerKind::Adam) {
        kv.emplace_back("train.adam_beta1", num(train.adam.beta1));
        kv.emplace_back("train.adam_beta2", num(train.adam.beta2));
        kv.emplace_back("train.adam_epsilon", num(train.adam.epsilon));
    }
    kv.emplace_back("train.seed", std::to_string(train.seed));
    kv.emplace_back("train.class_weights", class_weights_spec);
    kv.emplace_back("train.early_stop_patience",
                    train.early_stop_patience ? std::to_string(*train.early_stop_patience) : "0");
    kv.emplace_back("train.precision",
                    train.precision == PrecisionMode::Double ? "double" : "single");
    kv.emplace_back("train.split_ratio", num(split_ratio));
    kv.emplace_back("train.stratified", stratified ? "true" : "false");
    return kv;
}

std::optional<std::array<double, 3>> PipelineConfig::resolve_class_weights(
    const std::array<std::int64_t, kNumClasses>& counts) const {
    if (class_weights_spec.empty()) return std::nullopt;
    std::array<double, 3> w{};
    if (class_weights_spec == "auto") {
        // Inverse frequency: total / (num_classes * count_c).
        const double total =
            static_cast<double>(counts[0]) + static_cast<double>(counts[1]) +
            static_cast<double>(counts[2]);
        for (int c = 0; c < kNumClasses; ++c)
            w[static_cast<size_t>(c)] =
                counts[static_cast<size_t>(c)] > 0
                    ? total / (kNumClasses * static_cast<double>(counts[static_cast<size_t>(c)]))
                    : 0.0;
        return w;
    }
    std::istringstream ss(class_weights_spec);
    std::string field;
    for (int c = 0; c < kNumClasses; ++c) {
        if (!std::getline(ss, field, ','))
            throw ConfigError("class_weights: expected three comma-separated values or 'auto'");
        w[static_cast<size_t>(c)] = parse_double(trim(field), "class_weights");
    }
    if (std::getline(ss, field, ','))
        throw ConfigError("class_weights: expected exactly three values");
    return w;
}

} // namespace hsd
