#include "hsd/errors.hpp"
#include "hsd/pipeline.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <optional>

namespace {

struct GlobalOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> precision;
};

hsd::PipelineConfig load_config(const std::string& path, const GlobalOverrides& g) {
    hsd::PipelineConfig cfg = hsd::PipelineConfig::load(path);
    if (g.seed) cfg.train.seed = *g.seed;
    if (g.out_dir) cfg.output_dir = *g.out_dir;
    if (g.precision)
        cfg.train.precision =
            *g.precision == "single" ? hsd::PrecisionMode::Single : hsd::PrecisionMode::Double;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hsd: short-text three-class (clean/offensive/hate) classification toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOverrides overrides;
    std::uint64_t seed_value = 0;
    std::string out_value, precision_value;
    auto* seed_opt = app.add_option("--seed", seed_value, "override the configured RNG seed");
    auto* out_opt = app.add_option("--out", out_value, "override the configured output directory");
    auto* precision_opt =
        app.add_option("--precision", precision_value, "numeric precision (double|single)")
            ->check(CLI::IsMember({"double", "single"}));

    std::string config_path, model_dir, input_csv, output_csv, gold_csv, predictions_csv;
    std::vector<std::string> compare_configs;
    std::string rank_by = "macro";

    CLI::App* stats = app.add_subcommand("stats", "class distribution of the labeled train csv");
    stats->add_option("--config", config_path, "pipeline config file")->required();

    CLI::App* train = app.add_subcommand("train", "split, preprocess, fit and evaluate one model");
    train->add_option("--config", config_path, "pipeline config file")->required();

    CLI::App* predict = app.add_subcommand("predict", "apply a trained model dir to a csv");
    predict->add_option("--model-dir", model_dir, "artifact directory from `train`")->required();
    predict->add_option("--input", input_csv, "input csv (id,text or id,text,label)")->required();
    predict->add_option("--output", output_csv, "predictions csv to write")->required();

    CLI::App* eval = app.add_subcommand("eval", "score a predictions csv against gold labels");
    eval->add_option("--gold", gold_csv, "labeled csv")->required();
    eval->add_option("--predictions", predictions_csv, "csv from `predict`")->required();

    CLI::App* compare = app.add_subcommand("compare", "train several configs on one shared split");
    compare->add_option("--config", compare_configs, "pipeline config file (repeatable)")
        ->required()
        ->take_all();
    compare->add_option("--rank-by", rank_by, "ranking metric (macro|weighted)")
        ->check(CLI::IsMember({"macro", "weighted"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (seed_opt->count()) overrides.seed = seed_value;
    if (out_opt->count()) overrides.out_dir = out_value;
    if (precision_opt->count()) overrides.precision = precision_value;

    try {
        if (stats->parsed()) {
            hsd::run_stats(load_config(config_path, overrides), std::cout);
        } else if (train->parsed()) {
            hsd::run_train(load_config(config_path, overrides), std::cout);
        } else if (predict->parsed()) {
            hsd::run_predict(model_dir, input_csv, output_csv, std::cout);
        } else if (eval->parsed()) {
            hsd::run_eval(gold_csv, predictions_csv, std::cout);
        } else if (compare->parsed()) {
            std::vector<hsd::PipelineConfig> configs;
            configs.reserve(compare_configs.size());
            for (const auto& path : compare_configs) configs.push_back(load_config(path, overrides));
            const hsd::CompareOutcome outcome =
                hsd::run_compare(configs, rank_by == "weighted", std::cout);
            if (outcome.failures == configs.size()) return 2;
        }
    } catch (const hsd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const hsd::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const hsd::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
