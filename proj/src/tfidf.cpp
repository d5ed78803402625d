#include "hsd/tfidf.hpp"
#include "hsd/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace hsd {

TfidfModel TfidfModel::fit(const std::vector<CleanText>& corpus, int min_df) {
    if (corpus.empty()) throw DataError("tfidf fit: empty corpus");
    if (min_df < 1) throw ConfigError("tfidf fit: min_df must be >= 1");

    std::map<std::string, std::int64_t> df; // ordered: feature ids are stable
    for (const auto& doc : corpus) {
        std::map<std::string, bool> seen;
        for (const auto& token : doc.tokens) {
            if (!seen[token]) {
                seen[token] = true;
                ++df[token];
            }
        }
    }

    TfidfModel model;
    model.n_docs_ = static_cast<std::int64_t>(corpus.size());
    const double n = static_cast<double>(model.n_docs_);
    for (const auto& [token, count] : df) {
        if (count < min_df) continue;
        model.feature_to_id_.emplace(token, model.num_features());
        model.features_.push_back(token);
        model.df_.push_back(count);
        model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    return model;
}

SparseVector TfidfModel::transform(const CleanText& doc) const {
    std::map<int, double> counts;
    for (const auto& token : doc.tokens) {
        auto it = feature_to_id_.find(token);
        if (it != feature_to_id_.end()) counts[it->second] += 1.0;
    }

    SparseVector vec;
    vec.dim = num_features();
    double sq = 0.0;
    for (const auto& [idx, count] : counts) {
        const double w = count * idf_[static_cast<size_t>(idx)];
        vec.indices.push_back(idx);
        vec.values.push_back(w);
        sq += w * w;
    }
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (double& v : vec.values) v *= inv;
    }
    return vec;
}

void TfidfModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write tfidf model: " + path);
    out << "hsdtfidf 1\n";
    out << "n_docs\t" << n_docs_ << "\n";
    out << "n_features\t" << num_features() << "\n";
    char buf[64];
    for (int j = 0; j < num_features(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", idf_[static_cast<size_t>(j)]);
        out << features_[static_cast<size_t>(j)] << "\t" << df_[static_cast<size_t>(j)] << "\t"
            << buf << "\n";
    }
}

TfidfModel TfidfModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open tfidf model: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("hsdtfidf 1", 0) != 0)
        throw DataError(path + ": not a tfidf model file");

    TfidfModel model;
    std::int64_t n_features = -1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string first;
        std::getline(ss, first, '\t');
        std::string second;
        std::getline(ss, second, '\t');
        if (first == "n_docs") {
            model.n_docs_ = std::atoll(second.c_str());
        } else if (first == "n_features") {
            n_features = std::atoll(second.c_str());
        } else {
            std::string third;
            std::getline(ss, third, '\t');
            if (second.empty() || third.empty())
                throw DataError(path + ": malformed feature row '" + line + "'");
            model.feature_to_id_.emplace(first, model.num_features());
            model.features_.push_back(first);
            model.df_.push_back(std::atoll(second.c_str()));
            model.idf_.push_back(std::strtod(third.c_str(), nullptr));
        }
    }
    if (model.n_docs_ < 1) throw DataError(path + ": missing n_docs");
    if (n_features >= 0 && n_features != model.num_features())
        throw DataError(path + ": feature count mismatch");
    return model;
}

} // namespace hsd
