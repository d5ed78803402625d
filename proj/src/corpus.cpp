#include "hsd/corpus.hpp"
#include "hsd/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

namespace hsd {

namespace {

std::string ascii_lower(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace

ClassLabel parse_label(const std::string& s) {
    const std::string t = ascii_lower(s);
    if (t == "0" || t == "clean") return ClassLabel::Clean;
    if (t == "1" || t == "offensive") return ClassLabel::Offensive;
    if (t == "2" || t == "hate") return ClassLabel::Hate;
    throw DataError("unknown label '" + s + "' (expected 0/1/2 or CLEAN/OFFENSIVE/HATE)");
}

const char* label_name(ClassLabel label) {
    switch (label) {
    case ClassLabel::Clean: return "CLEAN";
    case ClassLabel::Offensive: return "OFFENSIVE";
    case ClassLabel::Hate: return "HATE";
    }
    return "?";
}

ClassLabel label_from_code(int code) {
    if (code < 0 || code >= kNumClasses)
        throw DataError("label code out of range: " + std::to_string(code));
    return static_cast<ClassLabel>(code);
}

namespace {

// RFC-4180 record reader: quoted fields may contain commas, doubled quotes
// and newlines. `row` counts physical records, header included.
struct CsvReader {
    const std::string& content;
    size_t pos = 0;
    const std::string& origin;
    int row = 0;

    bool at_end() const { return pos >= content.size(); }

    std::vector<std::string> next_record() {
        ++row;
        std::vector<std::string> fields;
        std::string field;
        bool in_quotes = false;
        bool quoted_field = false;
        while (true) {
            if (pos >= content.size()) {
                if (in_quotes)
                    throw DataError(origin + ": row " + std::to_string(row) +
                                    ": unterminated quoted field");
                fields.push_back(std::move(field));
                return fields;
            }
            char c = content[pos++];
            if (in_quotes) {
                if (c == '"') {
                    if (pos < content.size() && content[pos] == '"') {
                        field.push_back('"');
                        ++pos;
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(c);
                }
            } else if (c == '"' && field.empty() && !quoted_field) {
                in_quotes = true;
                quoted_field = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                quoted_field = false;
            } else if (c == '\n') {
                fields.push_back(std::move(field));
                return fields;
            } else if (c == '\r') {
                if (pos < content.size() && content[pos] == '\n') ++pos;
                fields.push_back(std::move(field));
                return fields;
            } else {
                field.push_back(c);
            }
        }
    }
};

bool needs_quoting(const std::string& s) {
    return s.find_first_of(",\"\r\n") != std::string::npos;
}

void append_csv_field(std::string& out, const std::string& s) {
    if (!needs_quoting(s)) {
        out += s;
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

} // namespace

std::vector<std::vector<std::string>> parse_csv_records(const std::string& content,
                                                        const std::string& origin) {
    std::vector<std::vector<std::string>> records;
    CsvReader reader{content, 0, origin};
    while (!reader.at_end()) {
        if (reader.pos + 1 == content.size() && content[reader.pos] == '\n') break;
        std::vector<std::string> fields = reader.next_record();
        if (fields.size() == 1 && fields[0].empty() && reader.at_end()) break;
        records.push_back(std::move(fields));
    }
    return records;
}

std::string csv_escape_field(const std::string& field) {
    std::string out;
    append_csv_field(out, field);
    return out;
}

std::vector<LabeledDocument> parse_csv(const std::string& content, bool has_labels,
                                       const std::string& origin) {
    std::string body = content;
    // Strip a UTF-8 BOM if present.
    if (body.size() >= 3 && body.compare(0, 3, "\xEF\xBB\xBF") == 0) body.erase(0, 3);

    CsvReader reader{body, 0, origin};
    const size_t expected_cols = has_labels ? 3 : 2;

    if (body.empty()) throw DataError(origin + ": missing header line");
    std::vector<std::string> header = reader.next_record();
    if (header.size() != expected_cols || header[0] != "id" || header[1] != "text" ||
        (has_labels && header[2] != "label"))
        throw DataError(origin + ": bad header, expected " +
                        (has_labels ? std::string("'id,text,label'") : std::string("'id,text'")));

    std::vector<LabeledDocument> docs;
    std::unordered_set<std::string> seen_ids;
    while (!reader.at_end()) {
        // A trailing newline yields one empty record; skip it.
        if (reader.pos + 1 == body.size() && body[reader.pos] == '\n') break;
        std::vector<std::string> fields = reader.next_record();
        if (fields.size() == 1 && fields[0].empty() && reader.at_end()) break;
        if (fields.size() != expected_cols)
            throw DataError(origin + ": row " + std::to_string(reader.row) + ": expected " +
                            std::to_string(expected_cols) + " columns, got " +
                            std::to_string(fields.size()));
        LabeledDocument doc;
        doc.id = fields[0];
        doc.text = fields[1];
        if (doc.id.empty())
            throw DataError(origin + ": row " + std::to_string(reader.row) + ": empty id");
        if (!seen_ids.insert(doc.id).second)
            throw DataError(origin + ": row " + std::to_string(reader.row) + ": duplicate id '" +
                            doc.id + "'");
        if (has_labels) {
            try {
                doc.label = parse_label(fields[2]);
            } catch (const DataError& e) {
                throw DataError(origin + ": row " + std::to_string(reader.row) + ": " + e.what());
            }
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<LabeledDocument> load_csv(const std::string& path, bool has_labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open csv file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), has_labels, path);
}

std::string format_csv(const std::vector<LabeledDocument>& docs, bool with_labels) {
    std::string out = with_labels ? "id,text,label\n" : "id,text\n";
    for (const auto& doc : docs) {
        append_csv_field(out, doc.id);
        out.push_back(',');
        append_csv_field(out, doc.text);
        if (with_labels) {
            if (!doc.label)
                throw DataError("cannot write labeled csv: document '" + doc.id + "' has no label");
            out.push_back(',');
            out += std::to_string(label_code(*doc.label));
        }
        out.push_back('\n');
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<LabeledDocument>& docs,
               bool with_labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write csv file: " + path);
    out << format_csv(docs, with_labels);
}

ClassDistribution class_stats(const std::vector<LabeledDocument>& docs) {
    if (docs.empty()) throw DataError("class_stats: empty dataset");
    ClassDistribution dist;
    std::vector<std::string> unlabeled;
    for (const auto& doc : docs) {
        if (!doc.label) {
            unlabeled.push_back(doc.id);
            continue;
        }
        ++dist.counts[static_cast<size_t>(label_code(*doc.label))];
    }
    if (!unlabeled.empty()) {
        std::string msg = "class_stats: unlabeled documents:";
        for (size_t i = 0; i < unlabeled.size() && i < 5; ++i) msg += " " + unlabeled[i];
        if (unlabeled.size() > 5) msg += " ... (" + std::to_string(unlabeled.size()) + " total)";
        throw DataError(msg);
    }
    dist.total = std::accumulate(dist.counts.begin(), dist.counts.end(), std::int64_t{0});
    for (int c = 0; c < kNumClasses; ++c)
        dist.percentages[c] = static_cast<double>(dist.counts[c]) / static_cast<double>(dist.total);
    return dist;
}

std::array<double, kNumClasses> ClassDistribution::display_percentages() const {
    std::array<double, kNumClasses> out{};
    if (total <= 0) return out;
    // Allocate hundredths of a percent by largest remainder so the display
    // column sums to exactly 100.00.
    std::array<std::int64_t, kNumClasses> floors{};
    std::array<double, kNumClasses> fracs{};
    std::int64_t assigned = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        double units = percentages[c] * 10000.0;
        floors[c] = static_cast<std::int64_t>(std::floor(units + 1e-9));
        fracs[c] = units - static_cast<double>(floors[c]);
        assigned += floors[c];
    }
    std::int64_t leftover = 10000 - assigned;
    std::array<int, kNumClasses> order = {0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (fracs[a] != fracs[b]) return fracs[a] > fracs[b];
        return a < b;
    });
    for (int i = 0; leftover > 0; i = (i + 1) % kNumClasses, --leftover) ++floors[order[i]];
    for (int c = 0; c < kNumClasses; ++c) out[c] = static_cast<double>(floors[c]) / 100.0;
    return out;
}

std::string format_stats_table(const ClassDistribution& dist) {
    const auto disp = dist.display_percentages();
    std::ostringstream os;
    os << std::left << std::setw(12) << "";
    for (int c = 0; c < kNumClasses; ++c) os << std::right << std::setw(11) << label_name(label_from_code(c));
    os << std::right << std::setw(11) << "TOTAL" << '\n';

    os << std::left << std::setw(12) << "Frequency";
    for (int c = 0; c < kNumClasses; ++c) os << std::right << std::setw(11) << dist.counts[c];
    os << std::right << std::setw(11) << dist.total << '\n';

    os << std::left << std::setw(12) << "Percentage";
    os << std::fixed << std::setprecision(2);
    for (int c = 0; c < kNumClasses; ++c) {
        std::ostringstream cell;
        cell << std::fixed << std::setprecision(2) << disp[c] << '%';
        os << std::right << std::setw(11) << cell.str();
    }
    os << std::right << std::setw(11) << "100.00%" << '\n';
    return os.str();
}

DatasetSplit split_dataset(const std::vector<LabeledDocument>& docs, double ratio,
                           std::uint64_t seed, bool stratified) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ConfigError("split ratio must lie in (0,1), got " + std::to_string(ratio));

    const size_t n = docs.size();
    const auto train_target =
        static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));

    std::vector<size_t> train_idx;
    std::mt19937_64 rng(seed);

    if (!stratified) {
        std::vector<size_t> idx(n);
        std::iota(idx.begin(), idx.end(), size_t{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        train_idx.assign(idx.begin(), idx.begin() + std::min(train_target, n));
    } else {
        std::array<std::vector<size_t>, kNumClasses> by_class;
        for (size_t i = 0; i < n; ++i) {
            if (!docs[i].label)
                throw DataError("stratified split requires labels; document '" + docs[i].id +
                                "' has none");
            by_class[static_cast<size_t>(label_code(*docs[i].label))].push_back(i);
        }
        // Largest-remainder apportionment of the train budget across classes;
        // keeps every class within one document of its overall proportion.
        std::array<size_t, kNumClasses> take{};
        std::array<double, kNumClasses> fracs{};
        size_t assigned = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            double exact = ratio * static_cast<double>(by_class[c].size());
            take[c] = static_cast<size_t>(std::floor(exact));
            fracs[c] = exact - static_cast<double>(take[c]);
            assigned += take[c];
        }
        std::array<int, kNumClasses> order = {0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (fracs[a] != fracs[b]) return fracs[a] > fracs[b];
            return a < b;
        });
        size_t leftover = train_target > assigned ? train_target - assigned : 0;
        for (int i = 0; leftover > 0; i = (i + 1) % kNumClasses) {
            int c = order[i];
            if (take[c] < by_class[c].size()) {
                ++take[c];
                --leftover;
            } else if (take[order[0]] >= by_class[order[0]].size() &&
                       take[order[1]] >= by_class[order[1]].size() &&
                       take[order[2]] >= by_class[order[2]].size()) {
                break; // every class exhausted
            }
        }
        for (int c = 0; c < kNumClasses; ++c) {
            std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
            train_idx.insert(train_idx.end(), by_class[c].begin(),
                             by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
        }
    }

    std::vector<bool> in_train(n, false);
    for (size_t i : train_idx) in_train[i] = true;

    DatasetSplit out;
    out.seed = seed;
    out.ratio = ratio;
    for (size_t i = 0; i < n; ++i)
        (in_train[i] ? out.train : out.held_out).push_back(docs[i]);
    return out;
}

} // namespace hsd
