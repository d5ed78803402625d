#ifndef HSD_PIPELINE_HPP
#define HSD_PIPELINE_HPP

#include "hsd/config.hpp"
#include "hsd/metrics.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hsd {

struct TrainOutcome {
    RunRecord record;
    std::string artifact_dir;
};

// stats: Table-I-style frequency/percentage table for the labeled train csv.
ClassDistribution run_stats(const PipelineConfig& cfg, std::ostream& out);

// train: split -> preprocess -> features -> fit; writes vocab/tfidf/model
// artifacts, a pipeline manifest, a held-out csv and the run record into the
// output dir, and prints the held-out metrics.
TrainOutcome run_train(const PipelineConfig& cfg, std::ostream& out);
TrainOutcome run_train_on_split(const PipelineConfig& cfg, const DatasetSplit& split,
                                std::ostream& out);

// predict: applies a trained artifact dir to a csv of documents; writes
// `id,predicted,score_clean,score_offensive,score_hate` rows in input order.
void run_predict(const std::string& model_dir, const std::string& input_csv,
                 const std::string& output_csv, std::ostream& out);

// eval: joins gold and prediction csvs on id and prints the full report.
MetricsReport run_eval(const std::string& gold_csv, const std::string& predictions_csv,
                       std::ostream& out);

struct CompareOutcome {
    std::vector<ComparisonRow> ranked;
    size_t failures = 0;
    std::vector<RunRecord> records;
};

// compare: one shared split (from the first config), one model per config,
// ranked table; per-model failures become `failed` rows.
CompareOutcome run_compare(const std::vector<PipelineConfig>& configs, bool rank_weighted,
                           std::ostream& out);

} // namespace hsd

#endif
