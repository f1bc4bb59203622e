#include "mvgrid/serialize.hpp"

#include <fstream>

#include "mvgrid/error.hpp"

namespace mvgrid {

void to_json(nlohmann::json& j, const Camera& camera) {
    nlohmann::json m = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        m.push_back({camera.world_from_camera(r, 0), camera.world_from_camera(r, 1), camera.world_from_camera(r, 2),
                     camera.world_from_camera(r, 3)});
    }
    j = nlohmann::json{{"world_from_camera", m}, {"fx", camera.fx},         {"fy", camera.fy},
                       {"cx", camera.cx},        {"cy", camera.cy},         {"width", camera.width},
                       {"height", camera.height}};
}

void from_json(const nlohmann::json& j, Camera& camera) {
    const auto& m = j.at("world_from_camera");
    require(m.is_array() && m.size() == 4, Errc::invalid_argument, "camera matrix must be 4x4");
    for (int r = 0; r < 4; ++r) {
        require(m[r].is_array() && m[r].size() == 4, Errc::invalid_argument, "camera matrix must be 4x4");
        for (int c = 0; c < 4; ++c) camera.world_from_camera(r, c) = m[r][c].get<double>();
    }
    camera.fx = j.at("fx").get<double>();
    camera.fy = j.at("fy").get<double>();
    camera.cx = j.at("cx").get<double>();
    camera.cy = j.at("cy").get<double>();
    camera.width = j.at("width").get<int>();
    camera.height = j.at("height").get<int>();
}

nlohmann::json vec3_to_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const nlohmann::json& j) {
    require(j.is_array() && j.size() == 3, Errc::invalid_argument, "expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), Errc::io, "cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        fail(Errc::io, "malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    require(out.good(), Errc::io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace mvgrid
