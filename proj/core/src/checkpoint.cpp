#include <fstream>

#include <nlohmann/json.hpp>

#include "mvgrid/error.hpp"
#include "mvgrid/optimize.hpp"
#include "mvgrid/serialize.hpp"

namespace mvgrid::recon4d {

namespace {

nlohmann::json flatten(std::span<const Vec3> values) {
    nlohmann::json out = nlohmann::json::array();
    for (const Vec3& v : values) out.push_back({v.x(), v.y(), v.z()});
    return out;
}

std::vector<Vec3> unflatten(const nlohmann::json& j) {
    std::vector<Vec3> out;
    for (const auto& v : j) out.push_back(vec3_from_json(v));
    return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const GaussianCloud& cloud, const DeformationField& field) {
    nlohmann::json planes = nlohmann::json::array();
    for (int p = 0; p < DeformationField::kPlanes; ++p) planes.push_back(field.plane(p));
    const nlohmann::json j{
        {"format", "mvgrid.model"},
        {"version", 1},
        {"cloud",
         {{"positions", flatten(cloud.positions)},
          {"log_scales", cloud.log_scales},
          {"opacity_logits", cloud.opacity_logits},
          {"colors", flatten(cloud.colors)}}},
        {"field",
         {{"box", {{"lo", vec3_to_json(field.box().lo)}, {"hi", vec3_to_json(field.box().hi)}}},
          {"resolution", field.resolution()},
          {"features", field.features()},
          {"planes", planes},
          {"head", field.head()}}}};
    write_json_file(path, j);
}

std::pair<GaussianCloud, DeformationField> load_checkpoint(const std::filesystem::path& path) {
    const nlohmann::json j = read_json_file(path);
    require(j.value("format", "") == "mvgrid.model" && j.value("version", 0) == 1, Errc::io,
            path.string() + " is not a version-1 model checkpoint");
    GaussianCloud cloud;
    const auto& c = j.at("cloud");
    cloud.positions = unflatten(c.at("positions"));
    cloud.log_scales = c.at("log_scales").get<std::vector<double>>();
    cloud.opacity_logits = c.at("opacity_logits").get<std::vector<double>>();
    cloud.colors = unflatten(c.at("colors"));
    cloud.validate();

    const auto& f = j.at("field");
    const Aabb box{vec3_from_json(f.at("box").at("lo")), vec3_from_json(f.at("box").at("hi"))};
    DeformationField field(box, f.at("resolution").get<int>(), f.at("features").get<int>(), 0);
    const auto& planes = f.at("planes");
    require(planes.size() == DeformationField::kPlanes, Errc::shape_mismatch, "checkpoint: expected six planes");
    for (int p = 0; p < DeformationField::kPlanes; ++p) {
        auto values = planes[p].get<std::vector<double>>();
        require(values.size() == field.plane(p).size(), Errc::shape_mismatch, "checkpoint: plane size mismatch");
        field.plane(p) = std::move(values);
    }
    auto head = f.at("head").get<std::vector<double>>();
    require(head.size() == field.head().size(), Errc::shape_mismatch, "checkpoint: head size mismatch");
    field.head() = std::move(head);
    return {std::move(cloud), std::move(field)};
}

}  // namespace mvgrid::recon4d
