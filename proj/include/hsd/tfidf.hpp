#ifndef HSD_TFIDF_HPP
#define HSD_TFIDF_HPP

#include "hsd/preprocess.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace hsd {

struct SparseVector {
    std::vector<int> indices; // strictly increasing
    std::vector<double> values;
    int dim = 0;

    bool empty() const { return indices.empty(); }
};

// Smoothed idf: idf_j = ln((1+N)/(1+df_j)) + 1; transformed vectors are raw
// term counts times idf, L2-normalized. An all-OOV document transforms to an
// empty vector (the one norm-0 case).
class TfidfModel {
  public:
    static TfidfModel fit(const std::vector<CleanText>& corpus, int min_df);

    SparseVector transform(const CleanText& doc) const;

    int num_features() const { return static_cast<int>(features_.size()); }
    std::int64_t n_docs() const { return n_docs_; }
    const std::vector<std::string>& features() const { return features_; }
    const std::vector<std::int64_t>& df() const { return df_; }
    const std::vector<double>& idf() const { return idf_; }

    void save(const std::string& path) const;
    static TfidfModel load(const std::string& path);

  private:
    std::vector<std::string> features_; // lexicographic order = feature id
    std::unordered_map<std::string, int> feature_to_id_;
    std::vector<std::int64_t> df_;
    std::vector<double> idf_;
    std::int64_t n_docs_ = 0;
};

} // namespace hsd

#endif
