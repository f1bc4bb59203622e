#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvgrid/camera.hpp"

namespace mvgrid::trajectory {

/// Greedy farthest point sampling over camera centres. The first pick is
/// index 0; each next pick maximises the minimum distance to the picked set,
/// ties going to the lowest index. Throws Errc::degenerate_input when k
/// exceeds the number of distinct centres.
std::vector<int> farthest_point_sample(std::span<const Camera> cameras, int k);

int distinct_center_count(std::span<const Camera> cameras);

inline constexpr double kStationaryDistanceFraction = 1e-3;
inline constexpr double kStationaryAngleDeg = 1.0;

/// True iff every pair of centres is closer than 1e-3 * scene_diagonal and
/// every pair of orientations differs by less than 1 degree.
bool is_stationary(std::span<const Camera> cameras, double scene_diagonal);

enum class PathKind { reuse_input, forward_spiral, inout_spiral, orbit };

const char* to_string(PathKind kind);
PathKind path_kind_from_string(const std::string& text);

struct PathParams {
    Vec3 center = Vec3::Zero();
    double radius = 3.0;
    double turns = 1.0;
    int count = 16;
    double elevation_deg = 15.0;  // orbit/inout_spiral: angle above the horizontal plane
    // inout_spiral: relative radial swing; forward_spiral: helix radius as a fraction of radius.
    double spiral_amplitude = 0.25;
    double forward_travel = 0.5;  // forward_spiral: fraction of radius travelled towards the centre
    double fov_x_deg = 50.0;
    int width = 64;
    int height = 64;

    void validate() const;
};

/// orbit: horizontal circle at the given elevation, azimuth 2*pi*turns*i/count,
/// measured from +x towards +z, looking at the centre.
/// inout_spiral: orbit whose radius swings by radius*spiral_amplitude*sin over one period.
/// forward_spiral: helix around a straight approach along +z towards the centre,
/// each camera looking one radius ahead along the approach.
std::vector<Camera> make_path(PathKind kind, const PathParams& params);

struct TrajectoryPlan {
    PathKind kind = PathKind::reuse_input;
    std::vector<int> anchor_indices;
    std::vector<Camera> novel_cameras;

    void validate(int input_count) const;
};

/// Anchors by FPS over the input cameras; novel cameras from the path, or the
/// distinct input cameras for reuse_input.
TrajectoryPlan make_plan(std::span<const Camera> input_cameras, int k, PathKind kind, const PathParams& params);

void to_json(nlohmann::json& j, const TrajectoryPlan& plan);
void from_json(const nlohmann::json& j, TrajectoryPlan& plan);

}  // namespace mvgrid::trajectory
