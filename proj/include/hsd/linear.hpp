#ifndef HSD_LINEAR_HPP
#define HSD_LINEAR_HPP

#include "hsd/corpus.hpp"
#include "hsd/tfidf.hpp"

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hsd {

enum class LinearKind { Logistic, Hinge };

struct LinearModel {
    Eigen::MatrixXd weights; // C x F
    Eigen::VectorXd bias;    // C
    LinearKind kind = LinearKind::Logistic;

    int num_classes() const { return static_cast<int>(weights.rows()); }
    int num_features() const { return static_cast<int>(weights.cols()); }
};

// Two-stage binary composition: stage A separates CLEAN from the rest,
// stage B separates OFFENSIVE from HATE.
struct CascadeModel {
    LinearModel stage_a;
    LinearModel stage_b;
};

struct LinearHyper {
    double lr = 0.5;
    int epochs = 50;
    double l2 = 1e-4;
    std::uint64_t seed = 42;
    int batch_size = 32;
    std::optional<std::array<double, 3>> class_weights; // logistic only
};

// Objectives, exposed so tests can difference them directly.
// Multinomial logistic: mean weighted cross-entropy + l2*||W||^2.
double logreg_loss_grad(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                        const std::vector<const SparseVector*>& xs, const std::vector<int>& ys,
                        const std::vector<double>& sample_weights, double l2,
                        Eigen::MatrixXd* grad_w, Eigen::VectorXd* grad_b);
// Binary hinge on the margin form (labels +-1): mean max(0, 1-y*(w.x+b)) + l2*||w||^2.
double hinge_loss_grad(const Eigen::VectorXd& w, double b,
                       const std::vector<const SparseVector*>& xs, const std::vector<int>& ys_pm1,
                       double l2, Eigen::VectorXd* grad_w, double* grad_b);

struct LinearFitResult {
    LinearModel model;
    std::vector<double> epoch_losses; // full-dataset objective after each epoch
};

LinearFitResult train_logreg(const std::vector<SparseVector>& features,
                             const std::vector<ClassLabel>& labels, const LinearHyper& hyper);

// labels are binary stage codes {0,1}; both classes must be present.
LinearFitResult train_svm_binary(const std::vector<SparseVector>& features,
                                 const std::vector<int>& labels, const LinearHyper& hyper);

struct CascadeFitResult {
    CascadeModel model;
    std::vector<double> epoch_losses; // stage A losses then stage B losses
};

CascadeFitResult train_cascade(const std::vector<SparseVector>& features,
                               const std::vector<ClassLabel>& labels, const LinearHyper& hyper);

// Raw class scores W.x + b.
Eigen::VectorXd linear_scores(const LinearModel& model, const SparseVector& x);
// Argmax with ties toward the lower index.
int predict_index(const LinearModel& model, const SparseVector& x);
// Three-class prediction; scores are softmax probabilities for logistic
// models and raw margins for hinge models.
std::pair<ClassLabel, Eigen::Vector3d> predict_linear(const LinearModel& model,
                                                      const SparseVector& x);

ClassLabel cascade_predict(const CascadeModel& cascade, const SparseVector& x);
// Cascade score triple: (clean margin, offensive margin, hate margin).
Eigen::Vector3d cascade_scores(const CascadeModel& cascade, const SparseVector& x);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

void save_linear(const std::string& path, const LinearModel& model);
LinearModel load_linear(const std::string& path);
void save_cascade(const std::string& path, const CascadeModel& model);
CascadeModel load_cascade(const std::string& path);

} // namespace hsd

#endif
