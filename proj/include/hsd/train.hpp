#ifndef HSD_TRAIN_HPP
#define HSD_TRAIN_HPP

#include "hsd/metrics.hpp"
#include "hsd/recurrent.hpp"

#include <chrono>
#include <optional>

namespace hsd {

enum class OptimizerKind { Sgd, Adam };
enum class PrecisionMode { Double, Single };

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    int epochs = 30;
    int batch_size = 32;
    double learning_rate = 0.001;
    OptimizerKind optimizer = OptimizerKind::Adam;
    AdamParams adam;
    std::uint64_t seed = 42;
    std::optional<std::array<double, 3>> class_weights;
    std::optional<int> early_stop_patience;
    PrecisionMode precision = PrecisionMode::Double;

    void validate() const;
};

// Weighted cross-entropy over an explicit probability simplex point,
// clamped at 1e-12. Training itself works from logits in log space.
double cross_entropy(const Eigen::Vector3d& probabilities, ClassLabel gold, double weight = 1.0);

struct LabeledSequence {
    TokenSequence seq;
    ClassLabel label = ClassLabel::Clean;
};

// ---------------------------------------------------------------------------
// Optimizers over recurrent parameter sets

template <class Scalar>
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Sgd;
    Scalar learning_rate = Scalar(0);
    AdamParams adam;
    long step_count = 0;
    GradientSet<Scalar> first_moment, second_moment; // adam only
};

template <class Scalar>
OptimizerState<Scalar> make_optimizer(const RecurrentClassifier<Scalar>& model,
                                      const TrainConfig& config) {
    OptimizerState<Scalar> state;
    state.kind = config.optimizer;
    state.learning_rate = static_cast<Scalar>(config.learning_rate);
    state.adam = config.adam;
    if (state.kind == OptimizerKind::Adam) {
        state.first_moment = make_gradient_set(model);
        state.second_moment = make_gradient_set(model);
    }
    return state;
}

template <class Scalar>
void optimizer_step(RecurrentClassifier<Scalar>& model, const GradientSet<Scalar>& grads,
                    OptimizerState<Scalar>& state) {
    for_each_tensor(
        model, /*trainable_only=*/true,
        [](const std::string& name, const auto& g) {
            if (!g.allFinite())
                throw NumericError("non-finite gradient in tensor '" + name + "'");
        },
        grads);

    ++state.step_count;
    if (state.kind == OptimizerKind::Sgd) {
        const Scalar lr = state.learning_rate;
        for_each_tensor(
            model, true,
            [lr](const std::string&, auto& p, const auto& g) { p -= lr * g; },
            model.params, grads);
        return;
    }

    const Scalar beta1 = static_cast<Scalar>(state.adam.beta1);
    const Scalar beta2 = static_cast<Scalar>(state.adam.beta2);
    const Scalar eps = static_cast<Scalar>(state.adam.epsilon);
    const Scalar lr = state.learning_rate;
    const Scalar bias1 = Scalar(1) - static_cast<Scalar>(
                                         std::pow(static_cast<double>(beta1), state.step_count));
    const Scalar bias2 = Scalar(1) - static_cast<Scalar>(
                                         std::pow(static_cast<double>(beta2), state.step_count));
    for_each_tensor(
        model, true,
        [&](const std::string&, auto& p, const auto& g, auto& m, auto& v) {
            m = beta1 * m + (Scalar(1) - beta1) * g;
            v = (beta2 * v.array() + (Scalar(1) - beta2) * g.array().square()).matrix();
            const auto m_hat = m.array() / bias1;
            const auto v_hat = v.array() / bias2;
            p.array() -= lr * m_hat / (v_hat.sqrt() + eps);
        },
        model.params, grads, state.first_moment, state.second_moment);
}

// ---------------------------------------------------------------------------
// Training loop

template <class Scalar>
std::pair<ClassLabel, Eigen::Vector3d> predict_recurrent(const RecurrentClassifier<Scalar>& model,
                                                         const TokenSequence& seq) {
    const ForwardCache<Scalar> cache = forward(model, seq);
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (cache.probs[c] > cache.probs[best]) best = c;
    Eigen::Vector3d probs;
    for (int c = 0; c < kNumClasses; ++c) probs[c] = static_cast<double>(cache.probs[c]);
    return {label_from_code(best), probs};
}

template <class Scalar>
MetricsReport evaluate_recurrent(const RecurrentClassifier<Scalar>& model,
                                 const std::vector<LabeledSequence>& data) {
    std::vector<ClassLabel> pred, gold;
    pred.reserve(data.size());
    gold.reserve(data.size());
    for (const auto& ex : data) {
        pred.push_back(predict_recurrent(model, ex.seq).first);
        gold.push_back(ex.label);
    }
    return evaluate(pred, gold);
}

// Mini-batch training with deterministic per-(seed, epoch) shuffling and
// mean-over-batch gradients. Early stopping tracks validation macro-F1 and
// restores the best epoch's parameters.
template <class Scalar>
RunRecord train_recurrent(RecurrentClassifier<Scalar>& model,
                          const std::vector<LabeledSequence>& train_set,
                          const std::vector<LabeledSequence>* val_set, const TrainConfig& config,
                          const std::string& model_name) {
    config.validate();
    if (train_set.empty()) throw DataError("train_recurrent: empty training set");

    const auto t0 = std::chrono::steady_clock::now();
    RunRecord record;
    record.model_name = model_name;
    record.seed = config.seed;

    OptimizerState<Scalar> opt = make_optimizer(model, config);
    GradientSet<Scalar> acc = make_gradient_set(model);

    const size_t n = train_set.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;

    const bool early_stop = config.early_stop_patience && *config.early_stop_patience > 0 &&
                            val_set != nullptr && !val_set->empty();
    double best_f1 = -1.0;
    int epochs_since_best = 0;
    RecurrentParams<Scalar> best_params;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::mt19937_64 rng(config.seed +
                            0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(epoch) + 1));
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        for (size_t start = 0; start < n; start += static_cast<size_t>(config.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(config.batch_size));
            zero_gradients(model, acc);
            for (size_t i = start; i < stop; ++i) {
                const LabeledSequence& ex = train_set[order[i]];
                const Scalar w = config.class_weights
                                     ? static_cast<Scalar>(
                                           (*config.class_weights)[static_cast<size_t>(
                                               label_code(ex.label))])
                                     : Scalar(1);
                const ForwardCache<Scalar> cache = forward(model, ex.seq);
                const double loss =
                    static_cast<double>(ce_from_logits(cache.logits, label_code(ex.label), w));
                if (!std::isfinite(loss))
                    throw NumericError("non-finite training loss at epoch " +
                                       std::to_string(epoch + 1) + ", example '" +
                                       std::to_string(order[i]) + "'");
                loss_sum += loss;
                backward_into(model, cache, ex.label, w, acc);
            }
            scale_gradients(model, acc, Scalar(1) / static_cast<Scalar>(stop - start));
            optimizer_step(model, acc, opt);
        }
        record.epoch_losses.push_back(loss_sum / static_cast<double>(n));

        if (early_stop) {
            const double f1 = evaluate_recurrent(model, *val_set).macro_f1;
            if (f1 > best_f1) {
                best_f1 = f1;
                best_params = model.params;
                epochs_since_best = 0;
            } else if (++epochs_since_best >= *config.early_stop_patience) {
                break;
            }
        }
    }
    if (early_stop && best_f1 >= 0.0) model.params = best_params;

    if (val_set != nullptr && !val_set->empty())
        record.held_out = evaluate_recurrent(model, *val_set);
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record;
}

} // namespace hsd

#endif
