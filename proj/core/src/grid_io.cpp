#include "mvgrid/grid_io.hpp"

#include <cstdio>

#include "mvgrid/error.hpp"
#include "mvgrid/serialize.hpp"

namespace mvgrid {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {
constexpr const char* kFormat = "mvgrid.grid";
constexpr int kVersion = 1;
}  // namespace

fs::path cell_path(const fs::path& dir, int row, int col) {
    char cam[16];
    char t[16];
    std::snprintf(cam, sizeof cam, "cam%03d", row);
    std::snprintf(t, sizeof t, "t%04d.png", col);
    return dir / cam / t;
}

void save_grid(const ViewGrid& grid, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["format"] = kFormat;
    manifest["version"] = kVersion;
    manifest["image_size"] = {grid.width(), grid.height()};
    manifest["cameras"] = grid.cameras();
    manifest["raw_times"] = grid.raw_times();
    manifest["normalized_times"] = grid.times();
    json fill = json::array();
    for (int i = 0; i < grid.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < grid.cols(); ++j) row.push_back(to_string(grid.fill(i, j)));
        fill.push_back(row);
    }
    manifest["fill_state"] = fill;

    for (int i = 0; i < grid.rows(); ++i) {
        for (int j = 0; j < grid.cols(); ++j) {
            if (grid.fill(i, j) == FillState::empty) continue;
            const fs::path p = cell_path(dir, i, j);
            fs::create_directories(p.parent_path());
            write_png16(p, grid.image(i, j));
        }
    }
    write_json_file(dir / "manifest.json", manifest);
}

ViewGrid load_grid(const fs::path& dir) {
    const fs::path manifest_path = dir / "manifest.json";
    require(fs::exists(manifest_path), Errc::io, "grid manifest not found: " + manifest_path.string());
    const json manifest = read_json_file(manifest_path);
    require(manifest.value("format", "") == kFormat, Errc::invalid_argument, "not a grid manifest");
    require(manifest.value("version", 0) == kVersion, Errc::invalid_argument, "unsupported grid manifest version");

    const auto size = manifest.at("image_size");
    const int width = size.at(0).get<int>();
    const int height = size.at(1).get<int>();
    auto cameras = manifest.at("cameras").get<std::vector<Camera>>();
    auto raw = manifest.at("raw_times").get<std::vector<double>>();
    auto times = manifest.at("normalized_times").get<std::vector<double>>();
    ViewGrid grid(std::move(cameras), std::move(raw), std::move(times), width, height);

    const auto& fill = manifest.at("fill_state");
    require(fill.is_array() && static_cast<int>(fill.size()) == grid.rows(), Errc::shape_mismatch,
            "fill_state row count does not match cameras");
    for (int i = 0; i < grid.rows(); ++i) {
        require(static_cast<int>(fill[i].size()) == grid.cols(), Errc::shape_mismatch,
                "fill_state column count does not match times");
        for (int j = 0; j < grid.cols(); ++j) {
            const FillState state = fill_state_from_string(fill[i][j].get<std::string>());
            if (state == FillState::empty) continue;
            const fs::path p = cell_path(dir, i, j);
            require(fs::exists(p), Errc::missing_cell, "missing cell file " + p.string());
            Image img = read_png16(p);
            require(img.width == width && img.height == height, Errc::shape_mismatch,
                    "cell image " + p.string() + " does not match the manifest image size");
            grid.set(i, j, std::move(img), state);
        }
    }
    return grid;
}

}  // namespace mvgrid
