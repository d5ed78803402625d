#ifndef HSD_CORPUS_HPP
#define HSD_CORPUS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsd {

enum class ClassLabel : int { Clean = 0, Offensive = 1, Hate = 2 };

constexpr int kNumClasses = 3;

// Accepts "0"/"1"/"2" and case-insensitive class names ("clean", "HATE", ...).
ClassLabel parse_label(const std::string& s);
const char* label_name(ClassLabel label);
inline int label_code(ClassLabel label) { return static_cast<int>(label); }
ClassLabel label_from_code(int code);

struct LabeledDocument {
    std::string id;
    std::string text;
    std::optional<ClassLabel> label;
};

struct ClassDistribution {
    std::array<std::int64_t, kNumClasses> counts{};
    std::int64_t total = 0;
    std::array<double, kNumClasses> percentages{};

    // Two-decimal display percentages allocated by largest remainder so the
    // printed column sums to 100.00 (matches how shared-task reports round).
    std::array<double, kNumClasses> display_percentages() const;
};

struct DatasetSplit {
    std::vector<LabeledDocument> train;
    std::vector<LabeledDocument> held_out;
    std::uint64_t seed = 0;
    double ratio = 0.0;
};

// CSV schema (UTF-8, RFC-4180 quoting): header `id,text,label` or `id,text`.
// Labels are `0|1|2` or class names. Errors name the offending row.
std::vector<LabeledDocument> load_csv(const std::string& path, bool has_labels);
std::vector<LabeledDocument> parse_csv(const std::string& content, bool has_labels,
                                       const std::string& origin);
// Raw records (header included) for non-document CSV surfaces.
std::vector<std::vector<std::string>> parse_csv_records(const std::string& content,
                                                        const std::string& origin);
std::string csv_escape_field(const std::string& field);
void write_csv(const std::string& path, const std::vector<LabeledDocument>& docs,
               bool with_labels);
std::string format_csv(const std::vector<LabeledDocument>& docs, bool with_labels);

ClassDistribution class_stats(const std::vector<LabeledDocument>& docs);

// Fixed-width frequency/percentage table over the three classes.
std::string format_stats_table(const ClassDistribution& dist);

// Deterministic for fixed (seed, ratio, stratified, input order). |train| is
// round(ratio*N); stratified splits keep each class within one document of
// its overall proportion.
DatasetSplit split_dataset(const std::vector<LabeledDocument>& docs, double ratio,
                           std::uint64_t seed, bool stratified);

} // namespace hsd

#endif
