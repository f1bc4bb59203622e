#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvgrid/toyworld.hpp"
#include "mvgrid/view_grid.hpp"

namespace mvgrid::metrics {

struct ConsistencyOptions {
    toyworld::RenderOptions render;
    // Scene proxy: column time searched over t +/- radius in `steps` samples.
    double time_search_radius = 0.1;
    int time_search_steps = 17;
    // Sceneless proxy: static Gaussian cloud fitted per column.
    int proxy_iterations = 200;
    double proxy_box_half_extent = 1.2;
    std::uint64_t seed = 0;
};

struct SeedScore {
    std::uint64_t seed = 0;
    double psnr_mean = 0.0;
    double temporal = 0.0;
    double view = 0.0;
};

struct ConsistencyReport {
    bool has_ground_truth = false;
    double psnr_mean = 0.0;
    double psnr_min = 0.0;
    // Mean over rows of the mean |adjacent-frame difference| on static pixels.
    double temporal_inconsistency = 0.0;
    // Mean over columns of the mean |cell - static proxy| at the fitted time.
    double view_inconsistency = 0.0;
    std::vector<SeedScore> per_seed;

    double combined() const { return temporal_inconsistency + view_inconsistency; }
};

/// With a scene, the static mask holds pixels whose ground truth is identical
/// at every grid time and the view proxy is the scene rendered at a fitted
/// column time plus a column-shared smooth colour bias. Without a scene, all
/// pixels count as static and the proxy is a static Gaussian cloud fitted to
/// the column. Throws Errc::missing_cell for an incomplete grid.
ConsistencyReport consistency_report(const ViewGrid& grid, const toyworld::SceneSpec* scene,
                                     const ConsistencyOptions& options = {});

/// Mean of several reports (min for psnr_min), keeping one SeedScore each.
ConsistencyReport aggregate(std::span<const ConsistencyReport> reports, std::span<const std::uint64_t> seeds);

nlohmann::json to_json(const ConsistencyReport& report);

}  // namespace mvgrid::metrics
