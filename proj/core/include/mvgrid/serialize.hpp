#pragma once

// JSON conversions for the library's value types (nlohmann ADL hooks).

#include <filesystem>

#include <nlohmann/json.hpp>

#include "mvgrid/camera.hpp"

namespace mvgrid {

void to_json(nlohmann::json& j, const Camera& camera);
void from_json(const nlohmann::json& j, Camera& camera);

nlohmann::json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mvgrid
