#include "eegfeat/artifact.hpp"

#include "eegfeat/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "artifact payloads are little-endian; big-endian hosts need byte swaps");

namespace eegfeat {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

using nlohmann::json;

const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("artifact payload missing field: ") + key);
    return *it;
}

json params_to_json(const ForestParams& p) {
    return json{{"n_trees", p.n_trees},
                {"max_depth", p.max_depth},
                {"min_samples_split", p.min_samples_split},
                {"min_samples_leaf", p.min_samples_leaf},
                {"max_features", p.max_features}};
}

ForestParams params_from_json(const json& j) {
    ForestParams p;
    p.n_trees = field(j, "n_trees").get<int>();
    p.max_depth = field(j, "max_depth").get<int>();
    p.min_samples_split = field(j, "min_samples_split").get<int>();
    p.min_samples_leaf = field(j, "min_samples_leaf").get<int>();
    p.max_features = field(j, "max_features").get<int>();
    return p;
}

} // namespace

std::string base64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        const unsigned b0 = data[i];
        const unsigned b1 = i + 1 < len ? data[i + 1] : 0;
        const unsigned b2 = i + 2 < len ? data[i + 2] : 0;
        out.push_back(kAlphabet[b0 >> 2]);
        out.push_back(kAlphabet[((b0 & 0x03u) << 4) | (b1 >> 4)]);
        out.push_back(i + 1 < len ? kAlphabet[((b1 & 0x0fu) << 2) | (b2 >> 6)] : '=');
        out.push_back(i + 2 < len ? kAlphabet[b2 & 0x3fu] : '=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw ParseError("base64 payload length is not a multiple of 4");
    std::vector<unsigned char> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int vals[4];
        int pads = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = text[i + k];
            if (c == '=') {
                if (i + 4 != text.size() || k < 2) throw ParseError("base64 padding misplaced");
                vals[k] = 0;
                ++pads;
            } else {
                if (pads > 0) throw ParseError("base64 padding misplaced");
                vals[k] = decode_char(c);
                if (vals[k] < 0) throw ParseError("invalid base64 character");
            }
        }
        out.push_back(static_cast<unsigned char>((vals[0] << 2) | (vals[1] >> 4)));
        if (pads < 2) out.push_back(static_cast<unsigned char>(((vals[1] & 0x0f) << 4) | (vals[2] >> 2)));
        if (pads < 1) out.push_back(static_cast<unsigned char>(((vals[2] & 0x03) << 6) | vals[3]));
    }
    return out;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * sizeof(double));
    std::size_t at = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::memcpy(bytes.data() + at, &m(r, c), sizeof(double));
            at += sizeof(double);
        }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", base64_encode(bytes.data(), bytes.size())}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = field(j, "rows").get<Eigen::Index>();
    const auto cols = field(j, "cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw ParseError("matrix payload has negative shape");
    std::vector<unsigned char> bytes = base64_decode(field(j, "data").get_ref<const std::string&>());
    if (bytes.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * sizeof(double))
        throw ParseError("matrix payload size does not match its shape header");
    Matrix m(rows, cols);
    std::size_t at = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            std::memcpy(&m(r, c), bytes.data() + at, sizeof(double));
            at += sizeof(double);
        }
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    std::vector<unsigned char> bytes(static_cast<std::size_t>(v.size()) * sizeof(double));
    if (!bytes.empty()) std::memcpy(bytes.data(), v.data(), bytes.size());
    return json{{"size", v.size()}, {"data", base64_encode(bytes.data(), bytes.size())}};
}

Vector vector_from_json(const nlohmann::json& j) {
    const auto size = field(j, "size").get<Eigen::Index>();
    if (size < 0) throw ParseError("vector payload has negative size");
    std::vector<unsigned char> bytes = base64_decode(field(j, "data").get_ref<const std::string&>());
    if (bytes.size() != static_cast<std::size_t>(size) * sizeof(double))
        throw ParseError("vector payload size does not match its header");
    Vector v(size);
    if (!bytes.empty()) std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
}

nlohmann::json tsg_to_json(const TsgModel& model) {
    json graphs = json::array();
    for (const Matrix& g : model.training_graphs.graphs) graphs.push_back(matrix_to_json(g));
    return json{{"graphs", std::move(graphs)},
                {"dist_min", model.dist_min},
                {"dist_max", model.dist_max},
                {"embedding", matrix_to_json(model.embedding)},
                {"singular_values", vector_to_json(model.singular_values)},
                {"d", model.d},
                {"projector", matrix_to_json(model.projector)}};
}

TsgModel tsg_from_json(const nlohmann::json& j) {
    TsgModel model;
    for (const json& g : field(j, "graphs")) model.training_graphs.graphs.push_back(matrix_from_json(g));
    model.dist_min = field(j, "dist_min").get<double>();
    model.dist_max = field(j, "dist_max").get<double>();
    model.embedding = matrix_from_json(field(j, "embedding"));
    model.singular_values = vector_from_json(field(j, "singular_values"));
    model.d = field(j, "d").get<int>();
    model.projector = matrix_from_json(field(j, "projector"));
    return model;
}

nlohmann::json bf_to_json(const BfModel& model) {
    json bands = json::array();
    for (const Band& b : model.band_set.bands)
        bands.push_back(json{{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}});
    return json{{"bands", std::move(bands)},
                {"psd", json{{"segment_samples", model.psd_params.segment_samples},
                             {"overlap", model.psd_params.overlap},
                             {"taper", model.psd_params.taper}}},
                {"pca_mean", vector_to_json(model.pca_mean)},
                {"pca_loadings", matrix_to_json(model.pca_loadings)},
                {"d_bf", model.d_bf}};
}

BfModel bf_from_json(const nlohmann::json& j) {
    BfModel model;
    for (const json& b : field(j, "bands"))
        model.band_set.bands.push_back(Band{field(b, "name").get<std::string>(),
                                            field(b, "low_hz").get<double>(),
                                            field(b, "high_hz").get<double>()});
    const json& psd = field(j, "psd");
    model.psd_params.segment_samples = field(psd, "segment_samples").get<int>();
    model.psd_params.overlap = field(psd, "overlap").get<double>();
    model.psd_params.taper = field(psd, "taper").get<std::string>();
    model.pca_mean = vector_from_json(field(j, "pca_mean"));
    model.pca_loadings = matrix_from_json(field(j, "pca_loadings"));
    model.d_bf = field(j, "d_bf").get<int>();
    return model;
}

nlohmann::json forest_to_json(const Forest& forest) {
    json trees = json::array();
    for (const Tree& tree : forest.trees) {
        json nodes = json::array();
        for (const TreeNode& node : tree.nodes)
            nodes.push_back(json::array({node.feature, node.threshold, node.left, node.right,
                                         node.n0, node.n1}));
        trees.push_back(std::move(nodes));
    }
    return json{{"n_features", forest.n_features},
                {"seed", forest.seed},
                {"params", params_to_json(forest.params)},
                {"trees", std::move(trees)}};
}

Forest forest_from_json(const nlohmann::json& j) {
    Forest forest;
    forest.n_features = field(j, "n_features").get<int>();
    forest.seed = field(j, "seed").get<std::uint64_t>();
    forest.params = params_from_json(field(j, "params"));
    for (const json& tree_json : field(j, "trees")) {
        Tree tree;
        for (const json& node_json : tree_json) {
            if (!node_json.is_array() || node_json.size() != 6)
                throw ParseError("forest node payload must be a 6-element array");
            TreeNode node;
            node.feature = node_json[0].get<int>();
            node.threshold = node_json[1].get<double>();
            node.left = node_json[2].get<int>();
            node.right = node_json[3].get<int>();
            node.n0 = node_json[4].get<std::int64_t>();
            node.n1 = node_json[5].get<std::int64_t>();
            tree.nodes.push_back(node);
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

void save_artifact(const std::string& path, const std::string& kind, const nlohmann::json& payload,
                   const std::string& config_hash) {
    json doc{{"format", kArtifactFormat},
             {"version", kArtifactVersion},
             {"kind", kind},
             {"config_hash", config_hash},
             {"payload", payload}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw Error("failed writing " + path);
}

nlohmann::json load_artifact(const std::string& path, const std::string& expected_kind,
                             std::string* config_hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open artifact file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError("artifact " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object() || field(doc, "format").get<std::string>() != kArtifactFormat)
        throw ParseError("artifact " + path + " has an unknown format tag");
    const int version = field(doc, "version").get<int>();
    if (version != kArtifactVersion)
        throw ParseError("artifact " + path + " has version " + std::to_string(version) +
                         ", expected " + std::to_string(kArtifactVersion));
    const std::string kind = field(doc, "kind").get<std::string>();
    if (kind != expected_kind)
        throw ParseError("artifact " + path + " holds a " + kind + ", expected " + expected_kind);
    if (config_hash) *config_hash = field(doc, "config_hash").get<std::string>();
    return field(doc, "payload");
}

} // namespace eegfeat
