#include "adm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "adm/errors.hpp"

namespace adm {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'A', 'D', 'M', 'C'};

struct TensorRef {
    std::string name;
    const Matrix* matrix = nullptr;
    const std::vector<double>* vec = nullptr;
};

std::vector<TensorRef> tensor_manifest(const ModelParams& params) {
    std::vector<TensorRef> refs;
    const auto& t = params.t;
    for (size_t f = 0; f < t.embeddings.size(); ++f)
        refs.push_back({"emb/" + std::to_string(f), &t.embeddings[f], nullptr});
    for (size_t f = 0; f < t.int_embeddings.size(); ++f)
        refs.push_back({"int_emb/" + std::to_string(f), &t.int_embeddings[f], nullptr});
    for (size_t l = 0; l < t.mlp_w.size(); ++l)
        refs.push_back({"mlp_w/" + std::to_string(l), &t.mlp_w[l], nullptr});
    for (size_t l = 0; l < t.mlp_b.size(); ++l)
        refs.push_back({"mlp_b/" + std::to_string(l), nullptr, &t.mlp_b[l]});
    refs.push_back({"head_w", &t.head_w, nullptr});
    if (!t.head_b.empty()) refs.push_back({"head_b", nullptr, &t.head_b});
    return refs;
}

std::string fingerprint_hex(std::uint64_t fp) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
    return buf;
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value;
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw CheckpointFormatError("checkpoint file is truncated");
    return value;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
    json header;
    header["schema_fingerprint"] = fingerprint_hex(params.schema_fingerprint);
    header["schema"] = json::parse(params.schema_json);
    header["grid"] = {{"lower", params.grid.lower},
                      {"upper", params.grid.upper},
                      {"width", params.grid.width},
                      {"n_buckets", params.grid.n_buckets}};
    header["netconfig"] = {{"interaction", to_string(params.net.interaction)},
                           {"d_int", params.net.d_int},
                           {"n_layers", params.net.n_layers},
                           {"softmax_bias", params.net.softmax_bias}};
    header["dims"] = {{"x1_dim", params.x1_dim},
                      {"x2_dim", params.x2_dim},
                      {"mlp_widths", params.mlp_widths},
                      {"concat_dim", params.concat_dim}};

    json manifest = json::array();
    std::uint64_t offset = 0;
    auto refs = tensor_manifest(params);
    for (const auto& ref : refs) {
        json entry;
        entry["name"] = ref.name;
        if (ref.matrix) {
            entry["shape"] = {ref.matrix->rows, ref.matrix->cols};
            entry["offset"] = offset;
            offset += ref.matrix->data.size() * sizeof(double);
        } else {
            entry["shape"] = {static_cast<int>(ref.vec->size())};
            entry["offset"] = offset;
            offset += ref.vec->size() * sizeof(double);
        }
        manifest.push_back(std::move(entry));
    }
    header["tensors"] = std::move(manifest);

    std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint file: " + path);
    out.write(kMagic, 4);
    write_pod<std::uint32_t>(out, kCheckpointVersion);
    write_pod<std::uint64_t>(out, header_text.size());
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& ref : refs) {
        const std::vector<double>& data = ref.matrix ? ref.matrix->data : *ref.vec;
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(double)));
    }
    if (!out) throw DataError("failed while writing checkpoint file: " + path);
}

ModelParams load_checkpoint(const std::string& path,
                            std::optional<std::uint64_t> expected_fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint file: " + path);

    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointFormatError("not a checkpoint file (bad magic): " + path);
    std::uint32_t version = read_pod<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                     " is not supported (expected " +
                                     std::to_string(kCheckpointVersion) + ")");
    std::uint64_t header_len = read_pod<std::uint64_t>(in);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw CheckpointFormatError("checkpoint file is truncated in header");

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::exception& e) {
        throw CheckpointFormatError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }

    ModelParams params;
    params.schema_json = header.at("schema").dump();
    FeatureSchema schema = FeatureSchema::deserialize(params.schema_json);
    params.schema_fingerprint = schema.fingerprint();
    if (fingerprint_hex(params.schema_fingerprint) !=
        header.at("schema_fingerprint").get<std::string>())
        throw CheckpointFormatError("checkpoint schema does not match its recorded fingerprint");
    if (expected_fingerprint && *expected_fingerprint != params.schema_fingerprint)
        throw CheckpointFingerprintError(
            "checkpoint was trained under a different feature schema");

    const auto& g = header.at("grid");
    params.grid = PriceGrid{g.at("lower").get<double>(), g.at("upper").get<double>(),
                            g.at("width").get<double>(), g.at("n_buckets").get<int>()};
    const auto& nc = header.at("netconfig");
    params.net.interaction = interaction_kind_from_string(nc.at("interaction").get<std::string>());
    params.net.d_int = nc.at("d_int").get<int>();
    params.net.n_layers = nc.at("n_layers").get<int>();
    params.net.softmax_bias = nc.at("softmax_bias").get<bool>();
    const auto& dims = header.at("dims");
    params.x1_dim = dims.at("x1_dim").get<int>();
    params.x2_dim = dims.at("x2_dim").get<int>();
    params.mlp_widths = dims.at("mlp_widths").get<std::vector<int>>();
    params.concat_dim = dims.at("concat_dim").get<int>();

    auto read_matrix = [&](const json& shape) {
        if (shape.size() != 2) throw CheckpointFormatError("tensor shape arity mismatch");
        Matrix m(shape.at(0).get<int>(), shape.at(1).get<int>());
        in.read(reinterpret_cast<char*>(m.data.data()),
                static_cast<std::streamsize>(m.data.size() * sizeof(double)));
        if (!in) throw CheckpointFormatError("checkpoint file is truncated in tensor data");
        return m;
    };
    auto read_vector = [&](const json& shape) {
        if (shape.size() != 1) throw CheckpointFormatError("tensor shape arity mismatch");
        std::vector<double> v(shape.at(0).get<size_t>());
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
        if (!in) throw CheckpointFormatError("checkpoint file is truncated in tensor data");
        return v;
    };

    for (const auto& entry : header.at("tensors")) {
        const std::string name = entry.at("name").get<std::string>();
        const json& shape = entry.at("shape");
        if (name.rfind("emb/", 0) == 0) {
            params.t.embeddings.push_back(read_matrix(shape));
        } else if (name.rfind("int_emb/", 0) == 0) {
            params.t.int_embeddings.push_back(read_matrix(shape));
        } else if (name.rfind("mlp_w/", 0) == 0) {
            params.t.mlp_w.push_back(read_matrix(shape));
        } else if (name.rfind("mlp_b/", 0) == 0) {
            params.t.mlp_b.push_back(read_vector(shape));
        } else if (name == "head_w") {
            params.t.head_w = read_matrix(shape);
        } else if (name == "head_b") {
            params.t.head_b = read_vector(shape);
        } else {
            throw CheckpointFormatError("unknown tensor '" + name + "' in checkpoint manifest");
        }
    }
    if (params.t.embeddings.size() != schema.cats.size())
        throw CheckpointFormatError("checkpoint tensor manifest is incomplete");
    return params;
}

}  // namespace adm
