#ifndef HSD_TESTS_RECURRENT_INSTANCES_HPP
#define HSD_TESTS_RECURRENT_INSTANCES_HPP

#include "hsd/recurrent.hpp"

#include <random>

namespace testutil {

// Step size for finite-difference gradient checks. 1e-5 steps leave only a
// ~3x noise margin on coordinates with small gradients (the difference of
// two O(1) losses carries ~1e-11 of roundoff); 3e-5 balances roundoff
// against truncation and keeps an order of magnitude of headroom under the
// 1e-5 gate.
inline constexpr double kGradCheckEpsilon = 3e-5;

struct RecurrentInstance {
    hsd::RecurrentClassifier<double> model;
    hsd::TokenSequence seq;
    hsd::ClassLabel gold = hsd::ClassLabel::Clean;
};

// Tiny randomized configuration (h <= 3, len <= 4) with moderate parameter
// scales so every gradient is large enough for the difference oracle to
// resolve.
inline RecurrentInstance make_recurrent_instance(int index, std::uint64_t seed_base = 9000) {
    using namespace hsd;
    std::mt19937_64 rng(seed_base + static_cast<std::uint64_t>(index));
    const CellKind kind = index % 2 ? CellKind::Gru : CellKind::Lstm;
    const bool bidi = (index / 2) % 2;
    const Pooling pooling = (index / 4) % 2 ? Pooling::MeanOverTime : Pooling::FinalState;
    const int h = 1 + index % 3;
    const int d = 2 + index % 2;
    const int vocab = 7;
    std::uniform_real_distribution<double> pv(-0.9, 0.9), ev(-0.8, 0.8);

    EmbeddingMatrix emb;
    emb.dim = d;
    emb.matrix = Eigen::MatrixXd::Zero(vocab, d);
    for (int r = 1; r < vocab; ++r)
        for (int c = 0; c < d; ++c) emb.matrix(r, c) = ev(rng);

    RecurrentInstance inst;
    inst.model = init_recurrent<double>(kind, h, emb, bidi, pooling, /*train_embedding=*/true,
                                        rng());
    for_each_tensor(
        inst.model, /*trainable_only=*/false,
        [&](const std::string& name, auto& t) {
            if (name == "embedding") return;
            for (Eigen::Index r = 0; r < t.rows(); ++r)
                for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = pv(rng);
        },
        inst.model.params);

    const int len = 2 + static_cast<int>(rng() % 3); // 2..4
    inst.seq.true_length = len;
    for (int t = 0; t < len; ++t)
        inst.seq.ids.push_back(2 + static_cast<int>(rng() % (vocab - 2)));
    inst.seq.ids.resize(static_cast<size_t>(len) + 1, Vocabulary::pad_id);
    inst.gold = label_from_code(static_cast<int>(rng() % 3));
    return inst;
}

} // namespace testutil

#endif
