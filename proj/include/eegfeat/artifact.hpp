#ifndef EEGFEAT_ARTIFACT_HPP
#define EEGFEAT_ARTIFACT_HPP

#include "eegfeat/bandpower.hpp"
#include "eegfeat/forest.hpp"
#include "eegfeat/graphcore.hpp"
#include "eegfeat/types.hpp"

#include "json.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace eegfeat {

inline constexpr int kArtifactVersion = 1;
inline constexpr const char* kArtifactFormat = "eegfeat-artifact";

std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(std::string_view text);

// Matrices travel as row-major little-endian float64 in base64, under a
// shape header, so round-trips are bit-identical.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json tsg_to_json(const TsgModel& model);
TsgModel tsg_from_json(const nlohmann::json& j);
nlohmann::json bf_to_json(const BfModel& model);
BfModel bf_from_json(const nlohmann::json& j);
nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& j);

// Versioned envelope. Loading checks format + version before touching the
// payload and verifies the expected kind ("tsg-model", "bf-model", "forest",
// "bundle").
void save_artifact(const std::string& path, const std::string& kind, const nlohmann::json& payload,
                   const std::string& config_hash);
nlohmann::json load_artifact(const std::string& path, const std::string& expected_kind,
                             std::string* config_hash = nullptr);

} // namespace eegfeat

#endif
