#include "hsd/vocab.hpp"
#include "hsd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace hsd {

Vocabulary build_vocab(const std::vector<CleanText>& corpus, int min_freq,
                       std::optional<int> max_size) {
    if (min_freq < 1) throw ConfigError("build_vocab: min_freq must be >= 1");
    // std::map keeps candidates in lexicographic order for the tie-break.
    std::map<std::string, std::int64_t> freq;
    for (const auto& text : corpus)
        for (const auto& token : text.tokens) ++freq[token];

    std::vector<std::pair<std::string, std::int64_t>> ranked;
    ranked.reserve(freq.size());
    for (auto& kv : freq)
        if (kv.second >= min_freq) ranked.emplace_back(kv.first, kv.second);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (max_size && static_cast<int>(ranked.size()) > *max_size)
        ranked.resize(static_cast<size_t>(*max_size));

    Vocabulary vocab;
    vocab.id_to_token = {"<pad>", Vocabulary::unk_token};
    for (const auto& [token, _] : ranked) {
        vocab.token_to_id.emplace(token, vocab.size());
        vocab.id_to_token.push_back(token);
    }
    return vocab;
}

TokenSequence encode(const CleanText& text, const Vocabulary& vocab, int max_len) {
    if (max_len < 1) throw ConfigError("encode: max_len must be >= 1");
    TokenSequence seq;
    seq.ids.assign(static_cast<size_t>(max_len), Vocabulary::pad_id);
    seq.true_length = std::min<int>(max_len, static_cast<int>(text.tokens.size()));
    for (int t = 0; t < seq.true_length; ++t)
        seq.ids[static_cast<size_t>(t)] = vocab.lookup(text.tokens[static_cast<size_t>(t)]);
    return seq;
}

std::vector<std::string> decode(const TokenSequence& seq, const Vocabulary& vocab) {
    std::vector<std::string> tokens;
    tokens.reserve(static_cast<size_t>(seq.true_length));
    for (int t = 0; t < seq.true_length; ++t) {
        const int id = seq.ids[static_cast<size_t>(t)];
        if (id < 0 || id >= vocab.size()) throw DataError("decode: id out of range");
        tokens.push_back(vocab.id_to_token[static_cast<size_t>(id)]);
    }
    return tokens;
}

namespace {

void seeded_uniform_row(Eigen::MatrixXd& m, int row, std::uint64_t seed, int id) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(id)};
    std::mt19937 rng(sq);
    std::uniform_real_distribution<double> dist(-0.25, 0.25);
    for (int j = 0; j < m.cols(); ++j) m(row, j) = dist(rng);
}

} // namespace

EmbeddingMatrix load_embeddings(const std::string& path, const Vocabulary& vocab,
                                std::optional<int> expected_dim, std::uint64_t seed) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);

    std::string line;
    int line_no = 0;
    int dim = -1;
    bool have_pending_line = false;

    // Header detection: a first line of exactly two integer fields.
    if (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string a, b, extra;
        if ((ss >> a >> b) && !(ss >> extra) &&
            a.find_first_not_of("0123456789") == std::string::npos &&
            b.find_first_not_of("0123456789") == std::string::npos) {
            dim = std::atoi(b.c_str());
            if (dim < 1) throw DataError(path + ": line 1: bad header dimension");
        } else {
            have_pending_line = true; // headerless: first line is a vector row
        }
    }
    if (expected_dim && dim >= 0 && dim != *expected_dim)
        throw DataError(path + ": header dimension " + std::to_string(dim) +
                        " does not match expected " + std::to_string(*expected_dim));

    EmbeddingMatrix emb;
    std::vector<std::pair<int, std::vector<double>>> found; // (vocab id, row)
    std::vector<char> covered(static_cast<size_t>(vocab.size()), 0);

    while (have_pending_line || std::getline(in, line)) {
        if (!have_pending_line) ++line_no;
        have_pending_line = false;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        const size_t sp = line.find(' ');
        if (sp == std::string::npos)
            throw DataError(path + ": line " + std::to_string(line_no) + ": no vector components");
        const std::string token = line.substr(0, sp);

        std::vector<double> values;
        size_t pos = sp + 1;
        while (pos <= line.size()) {
            size_t next = line.find(' ', pos);
            if (next == std::string::npos) next = line.size();
            const std::string field = line.substr(pos, next - pos);
            if (!field.empty()) {
                char* end = nullptr;
                const double v = std::strtod(field.c_str(), &end);
                if (end == field.c_str() || *end != '\0' || !std::isfinite(v))
                    throw DataError(path + ": line " + std::to_string(line_no) +
                                    ": non-numeric vector component '" + field + "'");
                values.push_back(v);
            }
            pos = next + 1;
        }
        if (values.empty())
            throw DataError(path + ": line " + std::to_string(line_no) + ": no vector components");

        if (dim < 0) {
            dim = static_cast<int>(values.size());
            if (expected_dim && dim != *expected_dim)
                throw DataError(path + ": line " + std::to_string(line_no) + ": dimension " +
                                std::to_string(dim) + " does not match expected " +
                                std::to_string(*expected_dim));
        }
        if (static_cast<int>(values.size()) != dim)
            throw DataError(path + ": line " + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " components, got " +
                            std::to_string(values.size()));

        const auto it = vocab.token_to_id.find(token);
        if (it != vocab.token_to_id.end() && !covered[static_cast<size_t>(it->second)]) {
            covered[static_cast<size_t>(it->second)] = 1;
            found.emplace_back(it->second, std::move(values));
        }
    }
    if (dim < 1) throw DataError(path + ": embedding file has no vector rows");

    emb.dim = dim;
    emb.matrix = Eigen::MatrixXd::Zero(vocab.size(), dim);
    for (int id = Vocabulary::unk_id; id < vocab.size(); ++id)
        if (!covered[static_cast<size_t>(id)]) seeded_uniform_row(emb.matrix, id, seed, id);
    for (const auto& [id, row] : found)
        for (int j = 0; j < dim; ++j) emb.matrix(id, j) = row[static_cast<size_t>(j)];

    const int n_tokens = vocab.size() - 2;
    int n_found = 0;
    for (int id = 2; id < vocab.size(); ++id) n_found += covered[static_cast<size_t>(id)];
    emb.coverage = n_tokens > 0 ? static_cast<double>(n_found) / n_tokens : 0.0;
    return emb;
}

EmbeddingMatrix init_random_embeddings(const Vocabulary& vocab, int dim, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("embedding dimension must be >= 1");
    EmbeddingMatrix emb;
    emb.dim = dim;
    emb.coverage = 0.0;
    emb.matrix = Eigen::MatrixXd::Zero(vocab.size(), dim);
    for (int id = Vocabulary::unk_id; id < vocab.size(); ++id)
        seeded_uniform_row(emb.matrix, id, seed, id);
    return emb;
}

void save_vocab(const std::string& path, const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write vocab file: " + path);
    out << "hsdvocab 1\n" << vocab.size() << "\n";
    for (int id = 2; id < vocab.size(); ++id) out << vocab.id_to_token[static_cast<size_t>(id)] << "\n";
}

Vocabulary load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open vocab file: " + path);
    std::string magic;
    int version = 0, size = 0;
    if (!(in >> magic >> version) || magic != "hsdvocab" || version != 1)
        throw DataError(path + ": not a vocab file (bad magic)");
    if (!(in >> size) || size < 2) throw DataError(path + ": bad vocab size");
    std::string line;
    std::getline(in, line); // finish header line

    Vocabulary vocab;
    vocab.id_to_token = {"<pad>", Vocabulary::unk_token};
    for (int id = 2; id < size; ++id) {
        if (!std::getline(in, line)) throw DataError(path + ": truncated vocab file");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) throw DataError(path + ": empty token at id " + std::to_string(id));
        vocab.token_to_id.emplace(line, vocab.size());
        vocab.id_to_token.push_back(line);
    }
    return vocab;
}

} // namespace hsd
