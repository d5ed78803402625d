#ifndef HSD_RECURRENT_HPP
#define HSD_RECURRENT_HPP

#include "hsd/corpus.hpp"
#include "hsd/errors.hpp"
#include "hsd/vocab.hpp"

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace hsd {

template <class Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class CellKind { Lstm, Gru };
enum class Pooling { FinalState, MeanOverTime };

const char* to_string(CellKind kind);
const char* to_string(Pooling pooling);
CellKind cell_kind_from_string(const std::string& s);
Pooling pooling_from_string(const std::string& s);

template <class Scalar>
struct GateParams {
    MatX<Scalar> U; // h x d, applied to the input
    MatX<Scalar> W; // h x h, applied to the previous hidden state
    VecX<Scalar> b; // h
};

template <class Scalar>
struct LstmCellParams {
    GateParams<Scalar> input, forget, output, candidate;
    int hidden_size() const { return static_cast<int>(input.U.rows()); }
    int input_size() const { return static_cast<int>(input.U.cols()); }
};

template <class Scalar>
struct GruCellParams {
    GateParams<Scalar> update, reset, candidate;
    int hidden_size() const { return static_cast<int>(update.U.rows()); }
    int input_size() const { return static_cast<int>(update.U.cols()); }
};

// Every trainable tensor of a recurrent classifier; doubles as the gradient
// container (GradientSet) with congruent shapes.
template <class Scalar>
struct RecurrentParams {
    MatX<Scalar> embedding; // |V| x d (empty in gradient sets when frozen)
    LstmCellParams<Scalar> fwd_lstm, bwd_lstm;
    GruCellParams<Scalar> fwd_gru, bwd_gru;
    MatX<Scalar> head_w; // 3 x H
    VecX<Scalar> head_b; // 3
};

template <class Scalar>
using GradientSet = RecurrentParams<Scalar>;

template <class Scalar>
struct RecurrentClassifier {
    CellKind cell_kind = CellKind::Lstm;
    bool bidirectional = false;
    Pooling pooling = Pooling::FinalState;
    bool train_embedding = true;
    int hidden = 0;
    int embed_dim = 0;
    RecurrentParams<Scalar> params;

    int vocab_size() const { return static_cast<int>(params.embedding.rows()); }
    int head_input_dim() const { return hidden * (bidirectional ? 2 : 1); }
};

// ---------------------------------------------------------------------------
// Elementwise math

template <class Scalar>
Scalar sigmoid_scalar(Scalar x) {
    if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}

template <class Scalar>
VecX<Scalar> sigmoid(const VecX<Scalar>& x) {
    return x.unaryExpr([](Scalar v) { return sigmoid_scalar(v); });
}

// Log-sum-exp stabilized softmax; safe for logits of magnitude 1e4. The
// true softmax is strictly positive for finite logits, so components that
// underflow are floored at the smallest normal value.
template <class Scalar>
VecX<Scalar> stable_softmax(const VecX<Scalar>& logits) {
    const Scalar m = logits.maxCoeff();
    VecX<Scalar> e = (logits.array() - m).exp();
    VecX<Scalar> p = e / e.sum();
    for (Eigen::Index i = 0; i < p.size(); ++i)
        p[i] = std::max(p[i], std::numeric_limits<Scalar>::min());
    return p;
}

template <class Scalar>
Scalar log_sum_exp(const VecX<Scalar>& v) {
    const Scalar m = v.maxCoeff();
    return m + std::log((v.array() - m).exp().sum());
}

// Cross-entropy of the gold class computed from logits in log space.
template <class Scalar>
Scalar ce_from_logits(const VecX<Scalar>& logits, int gold, Scalar weight = Scalar(1)) {
    return weight * (log_sum_exp(logits) - logits[gold]);
}

// ---------------------------------------------------------------------------
// Cell steps (spec'd standard formulations)

template <class Scalar>
struct LstmStepActs {
    VecX<Scalar> i, f, o, g, c, tanh_c, h;
};

template <class Scalar>
LstmStepActs<Scalar> lstm_step_full(const LstmCellParams<Scalar>& p, const VecX<Scalar>& x,
                                    const VecX<Scalar>& h_prev, const VecX<Scalar>& c_prev) {
    LstmStepActs<Scalar> a;
    a.i = sigmoid<Scalar>(p.input.U * x + p.input.W * h_prev + p.input.b);
    a.f = sigmoid<Scalar>(p.forget.U * x + p.forget.W * h_prev + p.forget.b);
    a.o = sigmoid<Scalar>(p.output.U * x + p.output.W * h_prev + p.output.b);
    a.g = (p.candidate.U * x + p.candidate.W * h_prev + p.candidate.b).array().tanh();
    a.c = a.f.cwiseProduct(c_prev) + a.i.cwiseProduct(a.g);
    a.tanh_c = a.c.array().tanh();
    a.h = a.o.cwiseProduct(a.tanh_c);
    return a;
}

template <class Scalar>
std::pair<VecX<Scalar>, VecX<Scalar>> lstm_step(const LstmCellParams<Scalar>& p,
                                                const VecX<Scalar>& x, const VecX<Scalar>& h_prev,
                                                const VecX<Scalar>& c_prev) {
    auto acts = lstm_step_full(p, x, h_prev, c_prev);
    return {acts.h, acts.c};
}

template <class Scalar>
struct GruStepActs {
    VecX<Scalar> z, r, hbar, h;
};

template <class Scalar>
GruStepActs<Scalar> gru_step_full(const GruCellParams<Scalar>& p, const VecX<Scalar>& x,
                                  const VecX<Scalar>& h_prev) {
    GruStepActs<Scalar> a;
    a.z = sigmoid<Scalar>(p.update.U * x + p.update.W * h_prev + p.update.b);
    a.r = sigmoid<Scalar>(p.reset.U * x + p.reset.W * h_prev + p.reset.b);
    a.hbar = (p.candidate.U * x + p.candidate.W * a.r.cwiseProduct(h_prev) + p.candidate.b)
                 .array()
                 .tanh();
    a.h = (VecX<Scalar>::Ones(h_prev.size()) - a.z).cwiseProduct(h_prev) + a.z.cwiseProduct(a.hbar);
    return a;
}

template <class Scalar>
VecX<Scalar> gru_step(const GruCellParams<Scalar>& p, const VecX<Scalar>& x,
                      const VecX<Scalar>& h_prev) {
    return gru_step_full(p, x, h_prev).h;
}

// ---------------------------------------------------------------------------
// Forward with cache, exact BPTT backward

// Per-direction activations, columns indexed by processing step.
template <class Scalar>
struct DirectionCache {
    MatX<Scalar> x;                      // d x T, inputs in processing order
    MatX<Scalar> i, f, o, g, c, tanh_c;  // lstm gates
    MatX<Scalar> z, r, hbar;             // gru gates
    MatX<Scalar> h;                      // h x T hidden states
    std::vector<int> positions;          // sequence position of each step
};

template <class Scalar>
struct ForwardCache {
    const RecurrentClassifier<Scalar>* model = nullptr;
    TokenSequence seq;
    int steps = 0; // true_length
    DirectionCache<Scalar> fwd, bwd;
    VecX<Scalar> pooled;
    VecX<Scalar> logits;
    VecX<Scalar> probs;
};

namespace detail {

template <class Scalar>
void run_direction(const RecurrentClassifier<Scalar>& model, const TokenSequence& seq,
                   bool reverse, DirectionCache<Scalar>& dir) {
    const int T = seq.true_length;
    const int h = model.hidden;
    const int d = model.embed_dim;

    dir.positions.resize(static_cast<size_t>(T));
    for (int j = 0; j < T; ++j) dir.positions[static_cast<size_t>(j)] = reverse ? T - 1 - j : j;

    dir.x.resize(d, T);
    for (int j = 0; j < T; ++j) {
        const int id = seq.ids[static_cast<size_t>(dir.positions[static_cast<size_t>(j)])];
        dir.x.col(j) = model.params.embedding.row(id).transpose();
    }

    dir.h.resize(h, T);
    VecX<Scalar> h_prev = VecX<Scalar>::Zero(h);
    if (model.cell_kind == CellKind::Lstm) {
        const auto& cell = reverse ? model.params.bwd_lstm : model.params.fwd_lstm;
        dir.i.resize(h, T);
        dir.f.resize(h, T);
        dir.o.resize(h, T);
        dir.g.resize(h, T);
        dir.c.resize(h, T);
        dir.tanh_c.resize(h, T);
        VecX<Scalar> c_prev = VecX<Scalar>::Zero(h);
        for (int j = 0; j < T; ++j) {
            auto acts = lstm_step_full<Scalar>(cell, dir.x.col(j), h_prev, c_prev);
            dir.i.col(j) = acts.i;
            dir.f.col(j) = acts.f;
            dir.o.col(j) = acts.o;
            dir.g.col(j) = acts.g;
            dir.c.col(j) = acts.c;
            dir.tanh_c.col(j) = acts.tanh_c;
            dir.h.col(j) = acts.h;
            h_prev = acts.h;
            c_prev = acts.c;
        }
    } else {
        const auto& cell = reverse ? model.params.bwd_gru : model.params.fwd_gru;
        dir.z.resize(h, T);
        dir.r.resize(h, T);
        dir.hbar.resize(h, T);
        for (int j = 0; j < T; ++j) {
            auto acts = gru_step_full<Scalar>(cell, dir.x.col(j), h_prev);
            dir.z.col(j) = acts.z;
            dir.r.col(j) = acts.r;
            dir.hbar.col(j) = acts.hbar;
            dir.h.col(j) = acts.h;
            h_prev = acts.h;
        }
    }
}

// Direction pooled vector: final processed state or mean over steps.
template <class Scalar>
VecX<Scalar> pool_direction(const RecurrentClassifier<Scalar>& model,
                            const DirectionCache<Scalar>& dir, int T) {
    if (T == 0) return VecX<Scalar>::Zero(model.hidden);
    if (model.pooling == Pooling::FinalState) return dir.h.col(T - 1);
    return dir.h.rowwise().sum() / Scalar(T);
}

} // namespace detail

template <class Scalar>
ForwardCache<Scalar> forward(const RecurrentClassifier<Scalar>& model, const TokenSequence& seq) {
    for (int t = 0; t < seq.true_length; ++t) {
        const int id = seq.ids[static_cast<size_t>(t)];
        if (id < 0 || id >= model.vocab_size())
            throw DataError("forward: token id " + std::to_string(id) +
                            " out of range for embedding of " +
                            std::to_string(model.vocab_size()) + " rows");
    }

    ForwardCache<Scalar> cache;
    cache.model = &model;
    cache.seq = seq;
    cache.steps = seq.true_length;
    const int T = cache.steps;

    detail::run_direction(model, seq, /*reverse=*/false, cache.fwd);
    if (model.bidirectional) detail::run_direction(model, seq, /*reverse=*/true, cache.bwd);

    const int H = model.head_input_dim();
    cache.pooled = VecX<Scalar>::Zero(H);
    cache.pooled.head(model.hidden) = detail::pool_direction(model, cache.fwd, T);
    if (model.bidirectional)
        cache.pooled.tail(model.hidden) = detail::pool_direction(model, cache.bwd, T);

    cache.logits = model.params.head_w * cache.pooled + model.params.head_b;
    cache.probs = stable_softmax(cache.logits);
    return cache;
}

template <class Scalar>
GradientSet<Scalar> make_gradient_set(const RecurrentClassifier<Scalar>& model);

namespace detail {

template <class Scalar>
void zero_like(const GateParams<Scalar>& src, GateParams<Scalar>& dst) {
    dst.U = MatX<Scalar>::Zero(src.U.rows(), src.U.cols());
    dst.W = MatX<Scalar>::Zero(src.W.rows(), src.W.cols());
    dst.b = VecX<Scalar>::Zero(src.b.size());
}

// BPTT through one direction; accumulates cell/embedding gradients.
template <class Scalar>
void backprop_direction(const RecurrentClassifier<Scalar>& model, const TokenSequence& seq,
                        const DirectionCache<Scalar>& dir, bool reverse,
                        const VecX<Scalar>& dpooled_part, GradientSet<Scalar>& grads) {
    const int T = static_cast<int>(dir.positions.size());
    if (T == 0) return;
    const int h = model.hidden;
    const bool mean_pool = model.pooling == Pooling::MeanOverTime;
    const bool train_emb = model.train_embedding && grads.embedding.size() > 0;

    VecX<Scalar> dh_next = VecX<Scalar>::Zero(h);
    VecX<Scalar> dx(model.embed_dim);

    if (model.cell_kind == CellKind::Lstm) {
        const auto& cell = reverse ? model.params.bwd_lstm : model.params.fwd_lstm;
        auto& gcell = reverse ? grads.bwd_lstm : grads.fwd_lstm;
        VecX<Scalar> dc_next = VecX<Scalar>::Zero(h);
        for (int j = T - 1; j >= 0; --j) {
            VecX<Scalar> dh = dh_next;
            if (mean_pool)
                dh += dpooled_part / Scalar(T);
            else if (j == T - 1)
                dh += dpooled_part;

            const auto i = dir.i.col(j), f = dir.f.col(j), o = dir.o.col(j), g = dir.g.col(j);
            const auto tanh_c = dir.tanh_c.col(j);
            const VecX<Scalar> h_prev = j > 0 ? VecX<Scalar>(dir.h.col(j - 1)) : VecX<Scalar>::Zero(h);
            const VecX<Scalar> c_prev = j > 0 ? VecX<Scalar>(dir.c.col(j - 1)) : VecX<Scalar>::Zero(h);

            const VecX<Scalar> da_o =
                dh.cwiseProduct(tanh_c).cwiseProduct(o).cwiseProduct(VecX<Scalar>::Ones(h) - o);
            VecX<Scalar> dc =
                dc_next + dh.cwiseProduct(o).cwiseProduct(
                              (VecX<Scalar>::Ones(h) - tanh_c.cwiseProduct(tanh_c)));
            const VecX<Scalar> da_f =
                dc.cwiseProduct(c_prev).cwiseProduct(f).cwiseProduct(VecX<Scalar>::Ones(h) - f);
            const VecX<Scalar> da_i =
                dc.cwiseProduct(g).cwiseProduct(i).cwiseProduct(VecX<Scalar>::Ones(h) - i);
            const VecX<Scalar> da_g =
                dc.cwiseProduct(i).cwiseProduct(VecX<Scalar>::Ones(h) - g.cwiseProduct(g));

            const auto x_t = dir.x.col(j);
            gcell.input.U.noalias() += da_i * x_t.transpose();
            gcell.forget.U.noalias() += da_f * x_t.transpose();
            gcell.output.U.noalias() += da_o * x_t.transpose();
            gcell.candidate.U.noalias() += da_g * x_t.transpose();
            gcell.input.W.noalias() += da_i * h_prev.transpose();
            gcell.forget.W.noalias() += da_f * h_prev.transpose();
            gcell.output.W.noalias() += da_o * h_prev.transpose();
            gcell.candidate.W.noalias() += da_g * h_prev.transpose();
            gcell.input.b += da_i;
            gcell.forget.b += da_f;
            gcell.output.b += da_o;
            gcell.candidate.b += da_g;

            dh_next = cell.input.W.transpose() * da_i + cell.forget.W.transpose() * da_f +
                      cell.output.W.transpose() * da_o + cell.candidate.W.transpose() * da_g;
            dc_next = dc.cwiseProduct(f);

            if (train_emb) {
                dx = cell.input.U.transpose() * da_i + cell.forget.U.transpose() * da_f +
                     cell.output.U.transpose() * da_o + cell.candidate.U.transpose() * da_g;
                const int pos = dir.positions[static_cast<size_t>(j)];
                grads.embedding.row(seq.ids[static_cast<size_t>(pos)]) += dx.transpose();
            }
        }
    } else {
        const auto& cell = reverse ? model.params.bwd_gru : model.params.fwd_gru;
        auto& gcell = reverse ? grads.bwd_gru : grads.fwd_gru;
        for (int j = T - 1; j >= 0; --j) {
            VecX<Scalar> dh = dh_next;
            if (mean_pool)
                dh += dpooled_part / Scalar(T);
            else if (j == T - 1)
                dh += dpooled_part;

            const auto z = dir.z.col(j), r = dir.r.col(j), hbar = dir.hbar.col(j);
            const VecX<Scalar> h_prev = j > 0 ? VecX<Scalar>(dir.h.col(j - 1)) : VecX<Scalar>::Zero(h);

            const VecX<Scalar> dz = dh.cwiseProduct(hbar - h_prev);
            const VecX<Scalar> da_z = dz.cwiseProduct(z).cwiseProduct(VecX<Scalar>::Ones(h) - z);
            const VecX<Scalar> dhbar = dh.cwiseProduct(z);
            const VecX<Scalar> da_h =
                dhbar.cwiseProduct(VecX<Scalar>::Ones(h) - hbar.cwiseProduct(hbar));
            const VecX<Scalar> w_h_da = cell.candidate.W.transpose() * da_h;
            const VecX<Scalar> dr = w_h_da.cwiseProduct(h_prev);
            const VecX<Scalar> da_r = dr.cwiseProduct(r).cwiseProduct(VecX<Scalar>::Ones(h) - r);

            const auto x_t = dir.x.col(j);
            gcell.update.U.noalias() += da_z * x_t.transpose();
            gcell.reset.U.noalias() += da_r * x_t.transpose();
            gcell.candidate.U.noalias() += da_h * x_t.transpose();
            gcell.update.W.noalias() += da_z * h_prev.transpose();
            gcell.reset.W.noalias() += da_r * h_prev.transpose();
            gcell.candidate.W.noalias() += da_h * r.cwiseProduct(h_prev).transpose();
            gcell.update.b += da_z;
            gcell.reset.b += da_r;
            gcell.candidate.b += da_h;

            dh_next = dh.cwiseProduct(VecX<Scalar>::Ones(h) - z) + cell.update.W.transpose() * da_z +
                      cell.reset.W.transpose() * da_r + w_h_da.cwiseProduct(r);

            if (train_emb) {
                dx = cell.update.U.transpose() * da_z + cell.reset.U.transpose() * da_r +
                     cell.candidate.U.transpose() * da_h;
                const int pos = dir.positions[static_cast<size_t>(j)];
                grads.embedding.row(seq.ids[static_cast<size_t>(pos)]) += dx.transpose();
            }
        }
    }
}

} // namespace detail

// Accumulates exact gradients of weight * cross_entropy(probs, gold) into
// `grads` (shaped by make_gradient_set). Pad positions and frozen embeddings
// contribute nothing.
template <class Scalar>
void backward_into(const RecurrentClassifier<Scalar>& model, const ForwardCache<Scalar>& cache,
                   ClassLabel gold, Scalar weight, GradientSet<Scalar>& grads) {
    if (cache.model != &model) throw DataError("backward: cache does not belong to this model");

    VecX<Scalar> dlogits = cache.probs;
    dlogits[label_code(gold)] -= Scalar(1);
    dlogits *= weight;

    grads.head_w.noalias() += dlogits * cache.pooled.transpose();
    grads.head_b += dlogits;

    const VecX<Scalar> dpooled = model.params.head_w.transpose() * dlogits;
    detail::backprop_direction(model, cache.seq, cache.fwd, false,
                               VecX<Scalar>(dpooled.head(model.hidden)), grads);
    if (model.bidirectional)
        detail::backprop_direction(model, cache.seq, cache.bwd, true,
                                   VecX<Scalar>(dpooled.tail(model.hidden)), grads);
}

template <class Scalar>
GradientSet<Scalar> backward(const RecurrentClassifier<Scalar>& model,
                             const ForwardCache<Scalar>& cache, ClassLabel gold,
                             Scalar weight = Scalar(1)) {
    GradientSet<Scalar> grads = make_gradient_set(model);
    backward_into(model, cache, gold, weight, grads);
    return grads;
}

// ---------------------------------------------------------------------------
// Tensor enumeration (optimizers, checkpoints, gradient checks)

// Calls f(name, tensor_of_each_set...) for every tensor the architecture
// uses. trainable_only skips the embedding when it is frozen.
template <class Scalar, class F, class... Sets>
void for_each_tensor(const RecurrentClassifier<Scalar>& model, bool trainable_only, F&& f,
                     Sets&... sets) {
    auto visit = [&](const std::string& name, auto&& get) { f(name, get(sets)...); };

    if (!trainable_only || model.train_embedding)
        visit("embedding", [](auto& p) -> auto& { return p.embedding; });

    auto visit_gate = [&](const std::string& prefix, auto&& get_gate) {
        f(prefix + ".U", get_gate(sets).U...);
        f(prefix + ".W", get_gate(sets).W...);
        f(prefix + ".b", get_gate(sets).b...);
    };

    if (model.cell_kind == CellKind::Lstm) {
        auto cell_tensors = [&](const std::string& cname, auto&& get_cell) {
            visit_gate(cname + ".input", [&](auto& p) -> auto& { return get_cell(p).input; });
            visit_gate(cname + ".forget", [&](auto& p) -> auto& { return get_cell(p).forget; });
            visit_gate(cname + ".output", [&](auto& p) -> auto& { return get_cell(p).output; });
            visit_gate(cname + ".candidate", [&](auto& p) -> auto& { return get_cell(p).candidate; });
        };
        cell_tensors("fwd_lstm", [](auto& p) -> auto& { return p.fwd_lstm; });
        if (model.bidirectional) cell_tensors("bwd_lstm", [](auto& p) -> auto& { return p.bwd_lstm; });
    } else {
        auto cell_tensors = [&](const std::string& cname, auto&& get_cell) {
            visit_gate(cname + ".update", [&](auto& p) -> auto& { return get_cell(p).update; });
            visit_gate(cname + ".reset", [&](auto& p) -> auto& { return get_cell(p).reset; });
            visit_gate(cname + ".candidate", [&](auto& p) -> auto& { return get_cell(p).candidate; });
        };
        cell_tensors("fwd_gru", [](auto& p) -> auto& { return p.fwd_gru; });
        if (model.bidirectional) cell_tensors("bwd_gru", [](auto& p) -> auto& { return p.bwd_gru; });
    }

    visit("head_w", [](auto& p) -> auto& { return p.head_w; });
    visit("head_b", [](auto& p) -> auto& { return p.head_b; });
}

template <class Scalar>
GradientSet<Scalar> make_gradient_set(const RecurrentClassifier<Scalar>& model) {
    GradientSet<Scalar> grads;
    const RecurrentParams<Scalar>& p = model.params;
    for_each_tensor(
        model, /*trainable_only=*/true,
        [](const std::string&, const auto& param, auto& grad) {
            grad.setZero(param.rows(), param.cols());
        },
        p, grads);
    return grads;
}

template <class Scalar>
void zero_gradients(const RecurrentClassifier<Scalar>& model, GradientSet<Scalar>& grads) {
    for_each_tensor(
        model, /*trainable_only=*/true, [](const std::string&, auto& g) { g.setZero(); }, grads);
}

template <class Scalar>
void scale_gradients(const RecurrentClassifier<Scalar>& model, GradientSet<Scalar>& grads,
                     Scalar factor) {
    for_each_tensor(
        model, /*trainable_only=*/true, [&](const std::string&, auto& g) { g *= factor; }, grads);
}

// ---------------------------------------------------------------------------
// Initialization

template <class Scalar>
RecurrentClassifier<Scalar> init_recurrent(CellKind kind, int hidden,
                                           const EmbeddingMatrix& embedding, bool bidirectional,
                                           Pooling pooling, bool train_embedding,
                                           std::uint64_t seed) {
    if (hidden < 1) throw ConfigError("recurrent model: hidden size must be >= 1");
    RecurrentClassifier<Scalar> model;
    model.cell_kind = kind;
    model.bidirectional = bidirectional;
    model.pooling = pooling;
    model.train_embedding = train_embedding;
    model.hidden = hidden;
    model.embed_dim = embedding.dim;
    model.params.embedding = embedding.matrix.cast<Scalar>();

    std::mt19937_64 rng(seed);
    // Uniform init scaled by 1/sqrt(fan_in); fan_in is the tensor's column
    // count (the dimension it contracts against).
    auto fill = [&rng](auto& m, Eigen::Index rows, Eigen::Index cols) {
        m.resize(rows, cols);
        const double limit = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(cols, 1)));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = static_cast<Scalar>(dist(rng));
    };
    const int d = model.embed_dim;
    auto init_gate = [&](GateParams<Scalar>& gate, Scalar bias_value) {
        fill(gate.U, hidden, d);
        fill(gate.W, hidden, hidden);
        gate.b = VecX<Scalar>::Constant(hidden, bias_value);
    };
    auto init_lstm = [&](LstmCellParams<Scalar>& cell) {
        init_gate(cell.input, Scalar(0));
        init_gate(cell.forget, Scalar(1)); // forget gate starts open
        init_gate(cell.output, Scalar(0));
        init_gate(cell.candidate, Scalar(0));
    };
    auto init_gru = [&](GruCellParams<Scalar>& cell) {
        init_gate(cell.update, Scalar(0));
        init_gate(cell.reset, Scalar(0));
        init_gate(cell.candidate, Scalar(0));
    };

    if (kind == CellKind::Lstm) {
        init_lstm(model.params.fwd_lstm);
        if (bidirectional) init_lstm(model.params.bwd_lstm);
    } else {
        init_gru(model.params.fwd_gru);
        if (bidirectional) init_gru(model.params.bwd_gru);
    }
    fill(model.params.head_w, kNumClasses, model.head_input_dim());
    model.params.head_b = VecX<Scalar>::Zero(kNumClasses);
    return model;
}

// ---------------------------------------------------------------------------
// Gradient check

// Max over all trainable parameters of |analytic - numeric| /
// max(|analytic|, |numeric|, 1e-12), central differences with step epsilon.
template <class Scalar>
double grad_check(RecurrentClassifier<Scalar>& model, const TokenSequence& seq, ClassLabel gold,
                  double epsilon = 1e-5) {
    GradientSet<Scalar> analytic = make_gradient_set(model);
    {
        ForwardCache<Scalar> cache = forward(model, seq);
        backward_into(model, cache, gold, Scalar(1), analytic);
    }

    double worst = 0.0;
    for_each_tensor(
        model, /*trainable_only=*/true,
        [&](const std::string&, auto& param, auto& grad) {
            for (Eigen::Index r = 0; r < param.rows(); ++r) {
                for (Eigen::Index c = 0; c < param.cols(); ++c) {
                    const Scalar saved = param(r, c);
                    param(r, c) = saved + static_cast<Scalar>(epsilon);
                    const double up =
                        static_cast<double>(ce_from_logits(forward(model, seq).logits,
                                                           label_code(gold)));
                    param(r, c) = saved - static_cast<Scalar>(epsilon);
                    const double down =
                        static_cast<double>(ce_from_logits(forward(model, seq).logits,
                                                           label_code(gold)));
                    param(r, c) = saved;
                    const double numeric = (up - down) / (2.0 * epsilon);
                    const double a = static_cast<double>(grad(r, c));
                    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-12});
                    worst = std::max(worst, std::abs(a - numeric) / denom);
                }
            }
        },
        model.params, analytic);
    return worst;
}

// ---------------------------------------------------------------------------
// Checkpoint IO (text container; values round-trip bitwise in double mode)

template <class Scalar>
void save_checkpoint(const std::string& path, const RecurrentClassifier<Scalar>& model);
template <class Scalar>
RecurrentClassifier<Scalar> load_checkpoint(const std::string& path);

struct CheckpointInfo {
    CellKind cell_kind = CellKind::Lstm;
    bool bidirectional = false;
    Pooling pooling = Pooling::FinalState;
    bool train_embedding = true;
    int hidden = 0;
    int embed_dim = 0;
    int vocab = 0;
};

CheckpointInfo read_checkpoint_info(const std::string& path);

} // namespace hsd

#endif
