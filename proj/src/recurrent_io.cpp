#include "hsd/recurrent.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hsd {

const char* to_string(CellKind kind) { return kind == CellKind::Lstm ? "lstm" : "gru"; }

const char* to_string(Pooling pooling) {
    return pooling == Pooling::FinalState ? "final_state" : "mean_over_time";
}

CellKind cell_kind_from_string(const std::string& s) {
    if (s == "lstm") return CellKind::Lstm;
    if (s == "gru") return CellKind::Gru;
    throw ConfigError("unknown cell kind '" + s + "'");
}

Pooling pooling_from_string(const std::string& s) {
    if (s == "final_state") return Pooling::FinalState;
    if (s == "mean_over_time") return Pooling::MeanOverTime;
    throw ConfigError("unknown pooling '" + s + "'");
}

namespace {

constexpr const char* kMagic = "hsdrnn";
constexpr int kVersion = 1;

struct HeaderFields {
    CheckpointInfo info;
};

HeaderFields read_header(std::istream& in, const std::string& path) {
    std::string magic, cell, pooling;
    int version = 0, bidi = 0, train_emb = 0;
    HeaderFields h;
    if (!(in >> magic >> version) || magic != kMagic || version != kVersion)
        throw DataError(path + ": not a recurrent checkpoint (bad magic)");
    std::string key;
    if (!(in >> key >> cell) || key != "cell") throw DataError(path + ": missing cell kind");
    h.info.cell_kind = cell_kind_from_string(cell);
    if (!(in >> key >> h.info.hidden) || key != "hidden" || h.info.hidden < 1)
        throw DataError(path + ": bad hidden size");
    if (!(in >> key >> h.info.embed_dim) || key != "embed_dim" || h.info.embed_dim < 1)
        throw DataError(path + ": bad embedding dimension");
    if (!(in >> key >> h.info.vocab) || key != "vocab" || h.info.vocab < 2)
        throw DataError(path + ": bad vocab size");
    if (!(in >> key >> bidi) || key != "bidirectional") throw DataError(path + ": bad direction flag");
    h.info.bidirectional = bidi != 0;
    if (!(in >> key >> pooling) || key != "pooling") throw DataError(path + ": bad pooling");
    h.info.pooling = pooling_from_string(pooling);
    if (!(in >> key >> train_emb) || key != "train_embedding")
        throw DataError(path + ": bad train_embedding flag");
    h.info.train_embedding = train_emb != 0;
    return h;
}

} // namespace

CheckpointInfo read_checkpoint_info(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    return read_header(in, path).info;
}

template <class Scalar>
void save_checkpoint(const std::string& path, const RecurrentClassifier<Scalar>& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << kMagic << " " << kVersion << "\n";
    out << "cell " << to_string(model.cell_kind) << "\n";
    out << "hidden " << model.hidden << "\n";
    out << "embed_dim " << model.embed_dim << "\n";
    out << "vocab " << model.vocab_size() << "\n";
    out << "bidirectional " << (model.bidirectional ? 1 : 0) << "\n";
    out << "pooling " << to_string(model.pooling) << "\n";
    out << "train_embedding " << (model.train_embedding ? 1 : 0) << "\n";

    char buf[48];
    for_each_tensor(
        model, /*trainable_only=*/false,
        [&](const std::string& name, const auto& tensor) {
            out << "tensor " << name << " " << tensor.rows() << " " << tensor.cols() << "\n";
            for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
                for (Eigen::Index c = 0; c < tensor.cols(); ++c) {
                    // Hexfloat keeps reloads bit-exact.
                    std::snprintf(buf, sizeof buf, "%a", static_cast<double>(tensor(r, c)));
                    out << (c ? " " : "") << buf;
                }
                out << "\n";
            }
        },
        model.params);
    out << "end\n";
}

template <class Scalar>
RecurrentClassifier<Scalar> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    HeaderFields h = read_header(in, path);

    RecurrentClassifier<Scalar> model;
    model.cell_kind = h.info.cell_kind;
    model.bidirectional = h.info.bidirectional;
    model.pooling = h.info.pooling;
    model.train_embedding = h.info.train_embedding;
    model.hidden = h.info.hidden;
    model.embed_dim = h.info.embed_dim;

    for_each_tensor(
        model, /*trainable_only=*/false,
        [&](const std::string& name, auto& tensor) {
            std::string tag, got;
            Eigen::Index rows = 0, cols = 0;
            if (!(in >> tag >> got >> rows >> cols) || tag != "tensor")
                throw DataError(path + ": truncated checkpoint before tensor '" + name + "'");
            if (got != name)
                throw DataError(path + ": tensor order mismatch, expected '" + name + "', got '" +
                                got + "'");
            if (rows < 0 || cols < 0) throw DataError(path + ": bad tensor shape for '" + name + "'");
            tensor.resize(rows, cols);
            std::string field;
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (Eigen::Index c = 0; c < cols; ++c) {
                    if (!(in >> field))
                        throw DataError(path + ": truncated values in tensor '" + name + "'");
                    char* end = nullptr;
                    const double v = std::strtod(field.c_str(), &end);
                    if (end == field.c_str() || *end != '\0')
                        throw DataError(path + ": bad value '" + field + "' in tensor '" + name +
                                        "'");
                    tensor(r, c) = static_cast<Scalar>(v);
                }
            }
        },
        model.params);

    std::string tail;
    if (!(in >> tail) || tail != "end") throw DataError(path + ": missing end marker");
    if (model.vocab_size() != h.info.vocab)
        throw DataError(path + ": embedding rows do not match declared vocab size");
    if (static_cast<int>(model.params.head_w.cols()) != model.head_input_dim())
        throw DataError(path + ": head width does not match architecture");
    return model;
}

template void save_checkpoint<double>(const std::string&, const RecurrentClassifier<double>&);
template void save_checkpoint<float>(const std::string&, const RecurrentClassifier<float>&);
template RecurrentClassifier<double> load_checkpoint<double>(const std::string&);
template RecurrentClassifier<float> load_checkpoint<float>(const std::string&);

} // namespace hsd
