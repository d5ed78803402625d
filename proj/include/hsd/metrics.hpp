#ifndef HSD_METRICS_HPP
#define HSD_METRICS_HPP

#include "hsd/corpus.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace hsd {

struct MetricsReport {
    // confusion[gold][predicted]
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> confusion{};
    std::int64_t total = 0;

    struct PerClass {
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
        std::int64_t support = 0;
    };
    std::array<PerClass, kNumClasses> per_class{};

    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;

    // 0/0 precision or recall conventions that fired (defined as 0).
    std::vector<std::string> warnings;
};

// Confusion matrix plus per-class and aggregate scores. Macro averages are
// unweighted means over all three classes, absent classes counting as 0.
MetricsReport evaluate(const std::vector<ClassLabel>& predictions,
                       const std::vector<ClassLabel>& gold);

std::string format_metrics(const MetricsReport& report);

struct RunRecord {
    std::string model_name;
    std::vector<std::pair<std::string, std::string>> config_snapshot;
    std::vector<double> epoch_losses;
    MetricsReport held_out;
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

std::string format_run_record(const RunRecord& record);
void save_run_record(const std::string& path, const RunRecord& record);

struct ComparisonRow {
    std::string model;
    double f1 = 0.0; // fraction in [0,1]
    bool failed = false;
    std::string error;
};

// Rows sorted by F1 descending, ties by model name; failed runs sink to the
// bottom.
std::vector<ComparisonRow> rank_runs(const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> rank_records(const std::vector<RunRecord>& records,
                                        bool by_weighted_f1 = false);
std::string format_comparison(const std::vector<ComparisonRow>& ranked);

} // namespace hsd

#endif
