#include "hsd/linear.hpp"
#include "hsd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace hsd {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    Eigen::VectorXd p = e / e.sum();
    for (Eigen::Index i = 0; i < p.size(); ++i)
        p[i] = std::max(p[i], std::numeric_limits<double>::min());
    return p;
}

namespace {

double logsumexp(const Eigen::VectorXd& v) {
    const double m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
}

Eigen::VectorXd sparse_scores(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                              const SparseVector& x) {
    Eigen::VectorXd s = bias;
    for (size_t k = 0; k < x.indices.size(); ++k)
        s += weights.col(x.indices[k]) * x.values[k];
    return s;
}

} // namespace

double logreg_loss_grad(const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                        const std::vector<const SparseVector*>& xs, const std::vector<int>& ys,
                        const std::vector<double>& sample_weights, double l2,
                        Eigen::MatrixXd* grad_w, Eigen::VectorXd* grad_b) {
    const double n = static_cast<double>(xs.size());
    if (grad_w) grad_w->setZero(weights.rows(), weights.cols());
    if (grad_b) grad_b->setZero(bias.size());

    double loss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const SparseVector& x = *xs[i];
        const double w = sample_weights[i];
        const Eigen::VectorXd logits = sparse_scores(weights, bias, x);
        loss += w * (logsumexp(logits) - logits[ys[i]]) / n;
        if (grad_w || grad_b) {
            Eigen::VectorXd dlogits = softmax(logits);
            dlogits[ys[i]] -= 1.0;
            dlogits *= w / n;
            if (grad_b) *grad_b += dlogits;
            if (grad_w)
                for (size_t k = 0; k < x.indices.size(); ++k)
                    grad_w->col(x.indices[k]) += dlogits * x.values[k];
        }
    }
    loss += l2 * weights.squaredNorm();
    if (grad_w) *grad_w += 2.0 * l2 * weights;
    return loss;
}

double hinge_loss_grad(const Eigen::VectorXd& w, double b,
                       const std::vector<const SparseVector*>& xs, const std::vector<int>& ys_pm1,
                       double l2, Eigen::VectorXd* grad_w, double* grad_b) {
    const double n = static_cast<double>(xs.size());
    if (grad_w) grad_w->setZero(w.size());
    if (grad_b) *grad_b = 0.0;

    double loss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const SparseVector& x = *xs[i];
        const double y = static_cast<double>(ys_pm1[i]);
        double score = b;
        for (size_t k = 0; k < x.indices.size(); ++k) score += w[x.indices[k]] * x.values[k];
        const double margin = y * score;
        if (margin < 1.0) {
            loss += (1.0 - margin) / n;
            if (grad_w)
                for (size_t k = 0; k < x.indices.size(); ++k)
                    (*grad_w)[x.indices[k]] -= y * x.values[k] / n;
            if (grad_b) *grad_b -= y / n;
        }
    }
    loss += l2 * w.squaredNorm();
    if (grad_w) *grad_w += 2.0 * l2 * w;
    return loss;
}

namespace {

void check_hyper(const LinearHyper& hyper) {
    // lr == 0 is legal: it must act as an exact no-op on parameters.
    if (!(hyper.lr >= 0.0)) throw ConfigError("linear training: learning rate must be >= 0");
    if (hyper.epochs < 1) throw ConfigError("linear training: epochs must be >= 1");
    if (hyper.batch_size < 1) throw ConfigError("linear training: batch size must be >= 1");
    if (hyper.l2 < 0.0) throw ConfigError("linear training: l2 must be >= 0");
}

int feature_dim(const std::vector<SparseVector>& features) {
    int dim = 0;
    for (const auto& x : features) dim = std::max(dim, x.dim);
    return dim;
}

} // namespace

LinearFitResult train_logreg(const std::vector<SparseVector>& features,
                             const std::vector<ClassLabel>& labels, const LinearHyper& hyper) {
    check_hyper(hyper);
    if (features.empty() || features.size() != labels.size())
        throw DataError("train_logreg: feature/label lists must be nonempty and equal length");

    const int f = feature_dim(features);
    const size_t n = features.size();

    std::vector<int> ys(n);
    std::vector<double> sw(n);
    for (size_t i = 0; i < n; ++i) {
        ys[i] = label_code(labels[i]);
        sw[i] = hyper.class_weights ? (*hyper.class_weights)[static_cast<size_t>(ys[i])] : 1.0;
    }

    LinearFitResult out;
    out.model.kind = LinearKind::Logistic;
    out.model.weights = Eigen::MatrixXd::Zero(kNumClasses, f);
    out.model.bias = Eigen::VectorXd::Zero(kNumClasses);

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(hyper.seed);

    Eigen::MatrixXd grad_w(kNumClasses, f);
    Eigen::VectorXd grad_b(kNumClasses);
    std::vector<const SparseVector*> batch_x;
    std::vector<int> batch_y;
    std::vector<double> batch_w;

    std::vector<const SparseVector*> all_x(n);
    for (size_t i = 0; i < n; ++i) all_x[i] = &features[i];

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t start = 0; start < n; start += static_cast<size_t>(hyper.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(hyper.batch_size));
            batch_x.clear();
            batch_y.clear();
            batch_w.clear();
            for (size_t i = start; i < stop; ++i) {
                batch_x.push_back(&features[order[i]]);
                batch_y.push_back(ys[order[i]]);
                batch_w.push_back(sw[order[i]]);
            }
            logreg_loss_grad(out.model.weights, out.model.bias, batch_x, batch_y, batch_w,
                             hyper.l2, &grad_w, &grad_b);
            out.model.weights -= hyper.lr * grad_w;
            out.model.bias -= hyper.lr * grad_b;
        }
        const double epoch_loss = logreg_loss_grad(out.model.weights, out.model.bias, all_x, ys,
                                                   sw, hyper.l2, nullptr, nullptr);
        if (!std::isfinite(epoch_loss))
            throw NumericError("train_logreg: non-finite loss after epoch " +
                               std::to_string(epoch + 1));
        out.epoch_losses.push_back(epoch_loss);
    }
    return out;
}

LinearFitResult train_svm_binary(const std::vector<SparseVector>& features,
                                 const std::vector<int>& labels, const LinearHyper& hyper) {
    check_hyper(hyper);
    if (features.empty() || features.size() != labels.size())
        throw DataError("train_svm_binary: feature/label lists must be nonempty and equal length");

    const size_t n = features.size();
    std::vector<int> ys(n);
    bool saw0 = false, saw1 = false;
    for (size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw DataError("train_svm_binary: labels must be binary-coded {0,1}");
        (labels[i] == 0 ? saw0 : saw1) = true;
        ys[i] = labels[i] == 0 ? -1 : 1;
    }
    if (!saw0 || !saw1)
        throw DataError("train_svm_binary: both classes required (margin undefined otherwise)");

    const int f = feature_dim(features);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(f);
    double b = 0.0;

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(hyper.seed);

    Eigen::VectorXd grad_w(f);
    double grad_b = 0.0;
    std::vector<const SparseVector*> batch_x;
    std::vector<int> batch_y;

    std::vector<const SparseVector*> all_x(n);
    for (size_t i = 0; i < n; ++i) all_x[i] = &features[i];

    LinearFitResult out;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t start = 0; start < n; start += static_cast<size_t>(hyper.batch_size)) {
            const size_t stop = std::min(n, start + static_cast<size_t>(hyper.batch_size));
            batch_x.clear();
            batch_y.clear();
            for (size_t i = start; i < stop; ++i) {
                batch_x.push_back(&features[order[i]]);
                batch_y.push_back(ys[order[i]]);
            }
            hinge_loss_grad(w, b, batch_x, batch_y, hyper.l2, &grad_w, &grad_b);
            w -= hyper.lr * grad_w;
            b -= hyper.lr * grad_b;
        }
        const double epoch_loss = hinge_loss_grad(w, b, all_x, ys, hyper.l2, nullptr, nullptr);
        if (!std::isfinite(epoch_loss))
            throw NumericError("train_svm_binary: non-finite loss after epoch " +
                               std::to_string(epoch + 1));
        out.epoch_losses.push_back(epoch_loss);
    }

    // Margin form stored as two class rows so argmax prediction applies:
    // score(1) - score(0) == w.x + b.
    out.model.kind = LinearKind::Hinge;
    out.model.weights = Eigen::MatrixXd::Zero(2, f);
    out.model.weights.row(0) = -0.5 * w.transpose();
    out.model.weights.row(1) = 0.5 * w.transpose();
    out.model.bias = Eigen::VectorXd::Zero(2);
    out.model.bias[0] = -0.5 * b;
    out.model.bias[1] = 0.5 * b;
    return out;
}

CascadeFitResult train_cascade(const std::vector<SparseVector>& features,
                               const std::vector<ClassLabel>& labels, const LinearHyper& hyper) {
    if (features.size() != labels.size() || features.empty())
        throw DataError("train_cascade: feature/label lists must be nonempty and equal length");

    std::vector<int> stage_a_labels(features.size());
    std::vector<SparseVector> stage_b_features;
    std::vector<int> stage_b_labels;
    for (size_t i = 0; i < features.size(); ++i) {
        stage_a_labels[i] = labels[i] == ClassLabel::Clean ? 0 : 1;
        if (labels[i] != ClassLabel::Clean) {
            stage_b_features.push_back(features[i]);
            stage_b_labels.push_back(labels[i] == ClassLabel::Offensive ? 0 : 1);
        }
    }

    CascadeFitResult out;
    LinearFitResult a = train_svm_binary(features, stage_a_labels, hyper);
    if (stage_b_features.empty())
        throw DataError("train_cascade: no OFFENSIVE/HATE documents for stage B");
    LinearFitResult bres = train_svm_binary(stage_b_features, stage_b_labels, hyper);

    out.model.stage_a = std::move(a.model);
    out.model.stage_b = std::move(bres.model);
    out.epoch_losses = std::move(a.epoch_losses);
    out.epoch_losses.insert(out.epoch_losses.end(), bres.epoch_losses.begin(),
                            bres.epoch_losses.end());
    return out;
}

Eigen::VectorXd linear_scores(const LinearModel& model, const SparseVector& x) {
    if (x.dim > model.num_features())
        throw DataError("linear_scores: feature dimension mismatch");
    return sparse_scores(model.weights, model.bias, x);
}

int predict_index(const LinearModel& model, const SparseVector& x) {
    const Eigen::VectorXd s = linear_scores(model, x);
    int best = 0;
    for (int c = 1; c < s.size(); ++c)
        if (s[c] > s[best]) best = c;
    return best;
}

std::pair<ClassLabel, Eigen::Vector3d> predict_linear(const LinearModel& model,
                                                      const SparseVector& x) {
    if (model.num_classes() != kNumClasses)
        throw DataError("predict_linear: model is not a 3-class model");
    Eigen::VectorXd s = linear_scores(model, x);
    if (model.kind == LinearKind::Logistic) s = softmax(s);
    int best = 0;
    for (int c = 1; c < s.size(); ++c)
        if (s[c] > s[best]) best = c;
    return {label_from_code(best), Eigen::Vector3d(s[0], s[1], s[2])};
}

ClassLabel cascade_predict(const CascadeModel& cascade, const SparseVector& x) {
    if (predict_index(cascade.stage_a, x) == 0) return ClassLabel::Clean;
    return predict_index(cascade.stage_b, x) == 0 ? ClassLabel::Offensive : ClassLabel::Hate;
}

Eigen::Vector3d cascade_scores(const CascadeModel& cascade, const SparseVector& x) {
    const Eigen::VectorXd a = linear_scores(cascade.stage_a, x);
    const Eigen::VectorXd b = linear_scores(cascade.stage_b, x);
    // Margins: positive first component favors CLEAN; the rest route
    // through stage B.
    return {a[0] - a[1], b[0] - b[1], b[1] - b[0]};
}

namespace {

void write_vector_line(std::ofstream& out, const Eigen::VectorXd& v) {
    char buf[64];
    for (int i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        out << (i ? " " : "") << buf;
    }
    out << "\n";
}

void save_linear_body(std::ofstream& out, const LinearModel& model) {
    out << "kind " << (model.kind == LinearKind::Logistic ? "logistic" : "hinge") << "\n";
    out << "shape " << model.num_classes() << " " << model.num_features() << "\n";
    for (int c = 0; c < model.num_classes(); ++c)
        write_vector_line(out, model.weights.row(c).transpose());
    write_vector_line(out, model.bias);
}

LinearModel load_linear_body(std::istream& in, const std::string& path) {
    std::string key, kind_str;
    int c = 0, f = 0;
    if (!(in >> key >> kind_str) || key != "kind" || (kind_str != "logistic" && kind_str != "hinge"))
        throw DataError(path + ": bad linear model kind");
    if (!(in >> key >> c >> f) || key != "shape" || c < 1 || f < 0)
        throw DataError(path + ": bad linear model shape");
    LinearModel model;
    model.kind = kind_str == "logistic" ? LinearKind::Logistic : LinearKind::Hinge;
    model.weights.resize(c, f);
    model.bias.resize(c);
    for (int i = 0; i < c; ++i)
        for (int j = 0; j < f; ++j)
            if (!(in >> model.weights(i, j))) throw DataError(path + ": truncated weights");
    for (int i = 0; i < c; ++i)
        if (!(in >> model.bias[i])) throw DataError(path + ": truncated bias");
    return model;
}

} // namespace

void save_linear(const std::string& path, const LinearModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write linear model: " + path);
    out << "hsdlinear 1\n";
    save_linear_body(out, model);
}

LinearModel load_linear(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open linear model: " + path);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "hsdlinear" || version != 1)
        throw DataError(path + ": not a linear model file");
    return load_linear_body(in, path);
}

void save_cascade(const std::string& path, const CascadeModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write cascade model: " + path);
    out << "hsdcascade 1\n";
    save_linear_body(out, model.stage_a);
    save_linear_body(out, model.stage_b);
}

CascadeModel load_cascade(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open cascade model: " + path);
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "hsdcascade" || version != 1)
        throw DataError(path + ": not a cascade model file");
    CascadeModel model;
    model.stage_a = load_linear_body(in, path);
    model.stage_b = load_linear_body(in, path);
    return model;
}

} // namespace hsd
