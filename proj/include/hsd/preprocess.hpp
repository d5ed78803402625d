#ifndef HSD_PREPROCESS_HPP
#define HSD_PREPROCESS_HPP

#include "hsd/corpus.hpp"

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hsd {

// Minimal UTF-8/codepoint utilities. Decoding never throws; malformed bytes
// become U+FFFD. Letter classification and lowercase mappings come from
// embedded Unicode character database tables (src/unicode_tables.inc).
namespace uni {
std::u32string decode_utf8(const std::string& s);
std::string encode_utf8(const std::u32string& s);
bool is_letter(char32_t cp);
bool is_space(char32_t cp);
char32_t to_lower(char32_t cp);
std::string lower_utf8(const std::string& s);
} // namespace uni

struct PreprocessConfig {
    bool lowercase = true;
    bool strip_urls = true;
    bool strip_mentions = true;
    // Removes digits, punctuation and symbols; keeps letters (any script,
    // Vietnamese diacritics included) and whitespace.
    bool strip_non_alphabetic = true;
    std::set<std::string> stopwords;
    std::u32string replace_empty; // codepoints deleted outright
    bool collapse_whitespace = true;

    // Lowercases stopword entries when `lowercase` is set, so the filter
    // matches post-pipeline tokens.
    void canonicalize();
};

struct CleanText {
    std::vector<std::string> tokens;

    bool operator==(const CleanText&) const = default;
    std::string joined() const; // tokens joined by single spaces
};

struct PreprocessedDocument {
    std::string id;
    CleanText text;
    std::optional<ClassLabel> label;
};

// Fixed rule order: lowercase, URL removal, mention removal, replace_empty,
// non-alphabetic removal, whitespace collapse, whitespace split, stopword
// filter. Degenerate input gives an empty token list.
CleanText normalize(const std::string& text, const PreprocessConfig& config);

// Order-preserving map of normalize; documents that clean to nothing are kept.
std::vector<PreprocessedDocument> preprocess_corpus(const std::vector<LabeledDocument>& docs,
                                                    const PreprocessConfig& config);

// One token per line, `#` starts a comment, blank lines ignored.
std::set<std::string> load_stopwords(const std::string& path);

} // namespace hsd

#endif
