#ifndef HSD_VOCAB_HPP
#define HSD_VOCAB_HPP

#include "hsd/preprocess.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hsd {

// Ids are contiguous: 0 = pad, 1 = unk, corpus tokens from 2 upward.
struct Vocabulary {
    static constexpr int pad_id = 0;
    static constexpr int unk_id = 1;
    static inline const std::string unk_token = "<unk>";

    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token; // [0]="<pad>", [1]="<unk>"

    int size() const { return static_cast<int>(id_to_token.size()); }
    int lookup(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? unk_id : it->second;
    }
};

struct TokenSequence {
    std::vector<int> ids; // length max_len, positions >= true_length hold pad
    int true_length = 0;
};

struct EmbeddingMatrix {
    Eigen::MatrixXd matrix; // |V| x d, row pad_id all zero
    int dim = 0;
    double coverage = 0.0; // fraction of corpus tokens (ids >= 2) found in file
};

// Tokens with frequency >= min_freq ranked by (frequency desc, token asc),
// truncated to max_size when given.
Vocabulary build_vocab(const std::vector<CleanText>& corpus, int min_freq,
                       std::optional<int> max_size = std::nullopt);

TokenSequence encode(const CleanText& text, const Vocabulary& vocab, int max_len);
std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab);

// Text format: optional `<count> <dim>` header, then `<token> <v1> ... <vd>`
// per line, single spaces. Vocab tokens found in the file are copied
// verbatim; absent tokens and unk get seeded uniform(-0.25,0.25) rows.
EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab,
                                std::optional<int> expected_dim, std::uint64_t seed);

// All-token random init (no pretrained file); coverage 0.
EmbeddingMatrix init_random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed);

void save_vocab(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocab(const std::string& path);

} // namespace hsd

#endif
