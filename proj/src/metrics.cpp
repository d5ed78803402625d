#include "hsd/metrics.hpp"
#include "hsd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace hsd {

MetricsReport evaluate(const std::vector<ClassLabel>& predictions,
                       const std::vector<ClassLabel>& gold) {
    if (predictions.size() != gold.size())
        throw DataError("evaluate: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(gold.size()) + " gold labels");
    if (gold.empty()) throw DataError("evaluate: empty evaluation set");

    MetricsReport report;
    report.total = static_cast<std::int64_t>(gold.size());
    for (size_t i = 0; i < gold.size(); ++i)
        ++report.confusion[static_cast<size_t>(label_code(gold[i]))]
                          [static_cast<size_t>(label_code(predictions[i]))];

    std::int64_t correct = 0;
    for (int c = 0; c < kNumClasses; ++c) correct += report.confusion[c][c];
    report.accuracy = static_cast<double>(correct) / static_cast<double>(report.total);

    double weighted_sum = 0.0;
    for (int c = 0; c < kNumClasses; ++c) {
        std::int64_t tp = report.confusion[c][c];
        std::int64_t fn = 0, fp = 0;
        for (int k = 0; k < kNumClasses; ++k) {
            if (k == c) continue;
            fn += report.confusion[c][k];
            fp += report.confusion[k][c];
        }
        auto& pc = report.per_class[c];
        pc.support = tp + fn;
        if (tp + fp == 0) {
            pc.precision = 0.0;
            if (pc.support > 0)
                report.warnings.push_back(std::string("precision 0/0 for class ") +
                                          label_name(label_from_code(c)) + ", defined as 0");
        } else {
            pc.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        }
        if (pc.support == 0) {
            pc.recall = 0.0;
            report.warnings.push_back(std::string("recall 0/0 for class ") +
                                      label_name(label_from_code(c)) + " (no support), defined as 0");
        } else {
            pc.recall = static_cast<double>(tp) / static_cast<double>(pc.support);
        }
        pc.f1 = (pc.precision + pc.recall) > 0.0
                    ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
        report.macro_precision += pc.precision / kNumClasses;
        report.macro_recall += pc.recall / kNumClasses;
        report.macro_f1 += pc.f1 / kNumClasses;
        weighted_sum += pc.f1 * static_cast<double>(pc.support);
    }
    report.weighted_f1 = weighted_sum / static_cast<double>(report.total);
    return report;
}

std::string format_metrics(const MetricsReport& report) {
    std::ostringstream os;
    os << "Confusion matrix (rows = gold, cols = predicted)\n";
    os << std::left << std::setw(12) << "";
    for (int c = 0; c < kNumClasses; ++c)
        os << std::right << std::setw(11) << label_name(label_from_code(c));
    os << '\n';
    for (int g = 0; g < kNumClasses; ++g) {
        os << std::left << std::setw(12) << label_name(label_from_code(g));
        for (int p = 0; p < kNumClasses; ++p) os << std::right << std::setw(11) << report.confusion[g][p];
        os << '\n';
    }
    os << '\n';
    os << std::left << std::setw(12) << "" << std::right << std::setw(11) << "Precision"
       << std::setw(11) << "Recall" << std::setw(11) << "F1" << std::setw(11) << "Support" << '\n';
    os << std::fixed << std::setprecision(4);
    for (int c = 0; c < kNumClasses; ++c) {
        const auto& pc = report.per_class[c];
        os << std::left << std::setw(12) << label_name(label_from_code(c));
        os << std::right << std::setw(11) << pc.precision << std::setw(11) << pc.recall
           << std::setw(11) << pc.f1 << std::setw(11) << pc.support << '\n';
    }
    os << '\n';
    os << "accuracy        " << report.accuracy << '\n';
    os << "macro precision " << report.macro_precision << '\n';
    os << "macro recall    " << report.macro_recall << '\n';
    os << "macro F1        " << report.macro_f1 << '\n';
    os << "weighted F1     " << report.weighted_f1 << '\n';
    for (const auto& w : report.warnings) os << "warning: " << w << '\n';
    return os.str();
}

namespace {

std::string fmt_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string format_run_record(const RunRecord& record) {
    std::ostringstream os;
    os << "hsdrun 1\n";
    os << "model = " << record.model_name << "\n";
    os << "seed = " << record.seed << "\n";
    os << "epochs_run = " << record.epoch_losses.size() << "\n";
    for (size_t e = 0; e < record.epoch_losses.size(); ++e)
        os << "loss_epoch_" << (e + 1) << " = " << fmt_full(record.epoch_losses[e]) << "\n";
    const auto& m = record.held_out;
    os << "accuracy = " << fmt_full(m.accuracy) << "\n";
    os << "macro_precision = " << fmt_full(m.macro_precision) << "\n";
    os << "macro_recall = " << fmt_full(m.macro_recall) << "\n";
    os << "macro_f1 = " << fmt_full(m.macro_f1) << "\n";
    os << "weighted_f1 = " << fmt_full(m.weighted_f1) << "\n";
    os << "confusion =";
    for (int g = 0; g < kNumClasses; ++g)
        for (int p = 0; p < kNumClasses; ++p) os << " " << m.confusion[g][p];
    os << "\n";
    for (int c = 0; c < kNumClasses; ++c) {
        os << "class_" << label_name(label_from_code(c)) << " = " << fmt_full(m.per_class[c].precision)
           << " " << fmt_full(m.per_class[c].recall) << " " << fmt_full(m.per_class[c].f1) << " "
           << m.per_class[c].support << "\n";
    }
    for (const auto& [key, value] : record.config_snapshot)
        os << "config." << key << " = " << value << "\n";
    // Wall clock is informational only; reproducibility checks must skip
    // this line.
    os << "wall_clock_seconds = " << std::fixed << std::setprecision(3) << record.wall_seconds
       << "\n";
    return os.str();
}

void save_run_record(const std::string& path, const RunRecord& record) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write run record: " + path);
    out << format_run_record(record);
}

std::vector<ComparisonRow> rank_runs(const std::vector<ComparisonRow>& rows) {
    std::vector<ComparisonRow> ranked = rows;
    std::sort(ranked.begin(), ranked.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.failed != b.failed) return !a.failed;
        if (a.f1 != b.f1) return a.f1 > b.f1;
        return a.model < b.model;
    });
    return ranked;
}

std::vector<ComparisonRow> rank_records(const std::vector<RunRecord>& records,
                                        bool by_weighted_f1) {
    std::vector<ComparisonRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records)
        rows.push_back({r.model_name,
                        by_weighted_f1 ? r.held_out.weighted_f1 : r.held_out.macro_f1, false, ""});
    return rank_runs(rows);
}

std::string format_comparison(const std::vector<ComparisonRow>& ranked) {
    size_t width = 5; // "Model"
    for (const auto& row : ranked) width = std::max(width, row.model.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(width + 2)) << "Model" << std::right
       << std::setw(9) << "F1-Score" << '\n';
    os << std::string(width + 2 + 9, '-') << '\n';
    for (const auto& row : ranked) {
        os << std::left << std::setw(static_cast<int>(width + 2)) << row.model;
        if (row.failed) {
            os << std::right << std::setw(9) << "failed";
        } else {
            std::ostringstream cell;
            cell << std::fixed << std::setprecision(2) << row.f1 * 100.0;
            os << std::right << std::setw(9) << cell.str();
        }
        os << '\n';
    }
    return os.str();
}

} // namespace hsd
