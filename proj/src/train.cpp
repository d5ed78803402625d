#include "hsd/train.hpp"
#include "hsd/errors.hpp"

#include <cmath>

namespace hsd {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (!(learning_rate > 0.0) && learning_rate != 0.0)
        throw ConfigError("train config: learning_rate must be >= 0");
    if (adam.beta1 < 0.0 || adam.beta1 >= 1.0 || adam.beta2 < 0.0 || adam.beta2 >= 1.0)
        throw ConfigError("train config: adam betas must lie in [0,1)");
    if (adam.epsilon <= 0.0) throw ConfigError("train config: adam epsilon must be > 0");
    if (class_weights)
        for (double w : *class_weights)
            if (!(w >= 0.0)) throw ConfigError("train config: class weights must be >= 0");
    if (early_stop_patience && *early_stop_patience < 0)
        throw ConfigError("train config: early_stop_patience must be >= 0");
}

double cross_entropy(const Eigen::Vector3d& probabilities, ClassLabel gold, double weight) {
    const double p = std::max(probabilities[label_code(gold)], 1e-12);
    return -weight * std::log(p);
}

} // namespace hsd
