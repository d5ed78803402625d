#include "hsd/preprocess.hpp"
#include "hsd/errors.hpp"

#include <algorithm>
#include <fstream>

namespace hsd {

namespace uni {

namespace {
#include "unicode_tables.inc"
} // namespace

std::u32string decode_utf8(const std::string& s) {
    std::u32string out;
    out.reserve(s.size());
    size_t i = 0;
    const size_t n = s.size();
    while (i < n) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        size_t len = 1;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            out.push_back(0xFFFD);
            ++i;
            continue;
        }
        if (len > 1) {
            if (i + len > n) {
                out.push_back(0xFFFD);
                ++i;
                continue;
            }
            bool ok = true;
            for (size_t k = 1; k < len; ++k) {
                const unsigned char bk = static_cast<unsigned char>(s[i + k]);
                if ((bk & 0xC0) != 0x80) {
                    ok = false;
                    break;
                }
                cp = (cp << 6) | (bk & 0x3F);
            }
            const char32_t min_cp = len == 2 ? 0x80 : len == 3 ? 0x800 : 0x10000;
            if (!ok || cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
                out.push_back(0xFFFD);
                ++i;
                continue;
            }
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(const std::u32string& s) {
    std::string out;
    out.reserve(s.size() * 2);
    for (char32_t cp : s) {
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

bool is_letter(char32_t cp) {
    const auto* first = std::begin(kLetterRanges);
    const auto* last = std::end(kLetterRanges);
    const auto* it = std::upper_bound(first, last, cp,
                                      [](char32_t v, const CpRange& r) { return v < r.lo; });
    if (it == first) return false;
    --it;
    return cp >= it->lo && cp <= it->hi;
}

bool is_space(char32_t cp) {
    switch (cp) {
    case U'\t':
    case U'\n':
    case U'\v':
    case U'\f':
    case U'\r':
    case U' ':
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

char32_t to_lower(char32_t cp) {
    const auto* first = std::begin(kLowerMap);
    const auto* last = std::end(kLowerMap);
    const auto* it = std::lower_bound(first, last, cp,
                                      [](const CaseMap& m, char32_t v) { return m.from < v; });
    if (it != last && it->from == cp) return it->to;
    return cp;
}

std::string lower_utf8(const std::string& s) {
    std::u32string cps = decode_utf8(s);
    for (char32_t& cp : cps) cp = to_lower(cp);
    return encode_utf8(cps);
}

} // namespace uni

void PreprocessConfig::canonicalize() {
    if (!lowercase) return;
    std::set<std::string> lowered;
    for (const auto& w : stopwords) lowered.insert(uni::lower_utf8(w));
    stopwords = std::move(lowered);
}

std::string CleanText::joined() const {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

namespace {

bool ascii_iequal(char32_t a, char b) {
    if (a > 0x7F) return false;
    char ca = static_cast<char>(a);
    if (ca >= 'A' && ca <= 'Z') ca = static_cast<char>(ca - 'A' + 'a');
    return ca == b;
}

// True if the run starting at `pos` begins with `prefix` (ASCII,
// case-insensitive).
bool run_has_prefix(const std::u32string& s, size_t pos, const char* prefix) {
    for (size_t k = 0; prefix[k]; ++k) {
        if (pos + k >= s.size() || !ascii_iequal(s[pos + k], prefix[k])) return false;
    }
    return true;
}

} // namespace

CleanText normalize(const std::string& text, const PreprocessConfig& config) {
    std::u32string cps = uni::decode_utf8(text);

    if (config.lowercase)
        for (char32_t& cp : cps) cp = uni::to_lower(cp);

    if (config.strip_urls) {
        std::u32string kept;
        kept.reserve(cps.size());
        size_t i = 0;
        while (i < cps.size()) {
            const bool run_start = i == 0 || uni::is_space(cps[i - 1]);
            if (run_start && !uni::is_space(cps[i]) &&
                (run_has_prefix(cps, i, "http://") || run_has_prefix(cps, i, "https://") ||
                 run_has_prefix(cps, i, "www."))) {
                while (i < cps.size() && !uni::is_space(cps[i])) ++i;
                continue;
            }
            kept.push_back(cps[i++]);
        }
        cps = std::move(kept);
    }

    if (config.strip_mentions) {
        std::u32string kept;
        kept.reserve(cps.size());
        size_t i = 0;
        while (i < cps.size()) {
            // '@' followed by a non-space run is dropped wholly; a bare '@'
            // stays (the non-alphabetic rule picks it up).
            if (cps[i] == U'@' && i + 1 < cps.size() && !uni::is_space(cps[i + 1])) {
                ++i;
                while (i < cps.size() && !uni::is_space(cps[i])) ++i;
                continue;
            }
            kept.push_back(cps[i++]);
        }
        cps = std::move(kept);
    }

    if (!config.replace_empty.empty()) {
        std::u32string kept;
        kept.reserve(cps.size());
        for (char32_t cp : cps)
            if (config.replace_empty.find(cp) == std::u32string::npos) kept.push_back(cp);
        cps = std::move(kept);
    }

    if (config.strip_non_alphabetic) {
        std::u32string kept;
        kept.reserve(cps.size());
        for (char32_t cp : cps)
            if (uni::is_letter(cp) || uni::is_space(cp)) kept.push_back(cp);
        cps = std::move(kept);
    }

    // Whitespace collapse and split; splitting on runs makes the collapse
    // flag a no-op for token output, it only shapes intermediate text.
    CleanText out;
    std::u32string token;
    for (char32_t cp : cps) {
        if (uni::is_space(cp)) {
            if (!token.empty()) {
                out.tokens.push_back(uni::encode_utf8(token));
                token.clear();
            }
        } else {
            token.push_back(cp);
        }
    }
    if (!token.empty()) out.tokens.push_back(uni::encode_utf8(token));

    if (!config.stopwords.empty()) {
        std::erase_if(out.tokens,
                      [&](const std::string& t) { return config.stopwords.count(t) > 0; });
    }
    return out;
}

std::vector<PreprocessedDocument> preprocess_corpus(const std::vector<LabeledDocument>& docs,
                                                    const PreprocessConfig& config) {
    std::vector<PreprocessedDocument> out;
    out.reserve(docs.size());
    for (const auto& doc : docs)
        out.push_back({doc.id, normalize(doc.text, config), doc.label});
    return out;
}

std::set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open stopword file: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim ASCII whitespace
        const size_t b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const size_t e = line.find_last_not_of(" \t");
        words.insert(line.substr(b, e - b + 1));
    }
    return words;
}

} // namespace hsd
