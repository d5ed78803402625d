#ifndef HSD_CONFIG_HPP
#define HSD_CONFIG_HPP

#include "hsd/preprocess.hpp"
#include "hsd/recurrent.hpp"
#include "hsd/train.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hsd {

enum class ModelKind { LogReg, SvmCascade, Gru, Lstm, BiLstm };

const char* to_string(ModelKind kind);
// Table-style display names: LR, SVM, GRU, LSTM, Bi-LSTM.
const char* display_name(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Flat `key = value` file with [sections]; full-line comments start with
// `#` or `;`.
struct IniEntry {
    std::string section, key, value;
};
std::vector<IniEntry> parse_ini(const std::string& content, const std::string& origin);

struct PipelineConfig {
    // [paths]
    std::string train_csv;
    std::string eval_csv;
    std::string embeddings;
    std::string stopwords;
    std::string output_dir = "out";

    // [preprocess]
    PreprocessConfig preprocess;

    // [vocab]
    int min_freq = 1;
    std::optional<int> max_size;
    int max_len = 100;

    // [model]
    ModelKind model = ModelKind::BiLstm;
    int hidden_size = 128;
    int embed_dim = 100;
    bool trainable_embedding = true;
    Pooling pooling = Pooling::FinalState;
    double l2 = 1e-4;  // linear models
    int min_df = 1;    // tfidf features

    // [train]
    TrainConfig train;
    std::string class_weights_spec; // "", "auto", or "w0,w1,w2"
    double split_ratio = 0.8;
    bool stratified = true;

    static PipelineConfig load(const std::string& path);
    static PipelineConfig parse(const std::string& content, const std::string& origin);

    // Referenced input paths must exist; called by load().
    void check_paths() const;

    bool is_linear() const { return model == ModelKind::LogReg || model == ModelKind::SvmCascade; }

    // Ordered key/value dump for run records.
    std::vector<std::pair<std::string, std::string>> snapshot() const;

    // Resolves "", "auto" (inverse frequency over the given counts) or an
    // explicit weight triple.
    std::optional<std::array<double, 3>> resolve_class_weights(
        const std::array<std::int64_t, kNumClasses>& counts) const;
};

} // namespace hsd

#endif
