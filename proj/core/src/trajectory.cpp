#include "mvgrid/trajectory.hpp"

#include <cmath>
#include <numbers>

#include "mvgrid/error.hpp"
#include "mvgrid/serialize.hpp"

namespace mvgrid::trajectory {

int distinct_center_count(std::span<const Camera> cameras) {
    int count = 0;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i && !seen; ++j) seen = cameras[i].center() == cameras[j].center();
        if (!seen) ++count;
    }
    return count;
}

std::vector<int> farthest_point_sample(std::span<const Camera> cameras, int k) {
    require(k >= 1, Errc::invalid_argument, "fps: k must be >= 1");
    require(k <= distinct_center_count(cameras), Errc::degenerate_input,
            "fps: k exceeds the number of distinct camera centres");
    const int n = static_cast<int>(cameras.size());
    std::vector<int> picked{0};
    std::vector<double> min_dist(n);
    for (int i = 0; i < n; ++i) min_dist[i] = (cameras[i].center() - cameras[0].center()).norm();
    while (static_cast<int>(picked.size()) < k) {
        int best = 0;
        for (int i = 1; i < n; ++i)
            if (min_dist[i] > min_dist[best]) best = i;
        picked.push_back(best);
        for (int i = 0; i < n; ++i)
            min_dist[i] = std::min(min_dist[i], (cameras[i].center() - cameras[best].center()).norm());
    }
    return picked;
}

bool is_stationary(std::span<const Camera> cameras, double scene_diagonal) {
    require(!cameras.empty(), Errc::invalid_argument, "is_stationary: empty camera list");
    const double max_dist = kStationaryDistanceFraction * scene_diagonal;
    const double max_angle = kStationaryAngleDeg * std::numbers::pi / 180.0;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        for (std::size_t j = i + 1; j < cameras.size(); ++j) {
            if ((cameras[i].center() - cameras[j].center()).norm() >= max_dist) return false;
            if (rotation_angle(cameras[i], cameras[j]) >= max_angle) return false;
        }
    }
    return true;
}

const char* to_string(PathKind kind) {
    switch (kind) {
        case PathKind::reuse_input: return "reuse_input";
        case PathKind::forward_spiral: return "forward_spiral";
        case PathKind::inout_spiral: return "inout_spiral";
        case PathKind::orbit: return "orbit";
    }
    return "?";
}

PathKind path_kind_from_string(const std::string& text) {
    for (PathKind k : {PathKind::reuse_input, PathKind::forward_spiral, PathKind::inout_spiral, PathKind::orbit})
        if (text == to_string(k)) return k;
    fail(Errc::invalid_argument, "unknown path kind: " + text);
}

void PathParams::validate() const {
    require(count >= 1, Errc::invalid_argument, "path: count must be >= 1");
    require(radius > 0.0, Errc::invalid_argument, "path: radius must be positive");
    require(std::abs(elevation_deg) < 89.0, Errc::invalid_argument, "path: |elevation| must be < 89 degrees");
    require(spiral_amplitude >= 0.0 && spiral_amplitude < 1.0, Errc::invalid_argument,
            "path: spiral_amplitude must lie in [0, 1)");
    require(forward_travel >= 0.0 && forward_travel < 1.0, Errc::invalid_argument,
            "path: forward_travel must lie in [0, 1)");
    require(fov_x_deg > 0.0 && fov_x_deg < 180.0, Errc::invalid_argument, "path: fov must lie in (0, 180)");
    require(width >= 1 && height >= 1, Errc::invalid_argument, "path: image size must be positive");
}

std::vector<Camera> make_path(PathKind kind, const PathParams& p) {
    p.validate();
    require(kind != PathKind::reuse_input, Errc::invalid_argument, "make_path: reuse_input has no parametric path");
    const double two_pi = 2.0 * std::numbers::pi;
    const double elev = p.elevation_deg * std::numbers::pi / 180.0;
    std::vector<Camera> out;
    out.reserve(p.count);
    for (int i = 0; i < p.count; ++i) {
        const double s = static_cast<double>(i) / p.count;
        if (kind == PathKind::forward_spiral) {
            const double progress = p.count == 1 ? 0.0 : static_cast<double>(i) / (p.count - 1);
            const Vec3 base = p.center + Vec3(0.0, 0.0, -p.radius * (1.0 - p.forward_travel * progress));
            const double angle = two_pi * p.turns * progress;
            const double helix = p.spiral_amplitude * p.radius;
            const Vec3 eye = base + helix * Vec3(std::cos(angle), std::sin(angle), 0.0);
            const Vec3 target = base + Vec3(0.0, 0.0, p.radius);
            out.push_back(Camera::look_at_fov(eye, target, p.fov_x_deg, p.width, p.height));
            continue;
        }
        const double azimuth = two_pi * p.turns * s;
        double r = p.radius;
        if (kind == PathKind::inout_spiral) r *= 1.0 + p.spiral_amplitude * std::sin(two_pi * s);
        const Vec3 dir(std::cos(elev) * std::cos(azimuth), std::sin(elev), std::cos(elev) * std::sin(azimuth));
        out.push_back(Camera::look_at_fov(p.center + r * dir, p.center, p.fov_x_deg, p.width, p.height));
    }
    return out;
}

void TrajectoryPlan::validate(int input_count) const {
    require(static_cast<int>(anchor_indices.size()) <= input_count, Errc::invalid_argument,
            "plan: more anchors than input frames");
    for (std::size_t i = 0; i < anchor_indices.size(); ++i) {
        require(anchor_indices[i] >= 0 && anchor_indices[i] < input_count, Errc::out_of_range,
                "plan: anchor index out of range");
        for (std::size_t j = 0; j < i; ++j)
            require(anchor_indices[i] != anchor_indices[j], Errc::invalid_argument, "plan: duplicate anchor index");
    }
}

TrajectoryPlan make_plan(std::span<const Camera> input_cameras, int k, PathKind kind, const PathParams& params) {
    TrajectoryPlan plan;
    plan.kind = kind;
    plan.anchor_indices = farthest_point_sample(input_cameras, k);
    if (kind == PathKind::reuse_input) {
        for (const Camera& c : input_cameras) {
            bool seen = false;
            for (const Camera& o : plan.novel_cameras) seen = seen || o == c;
            if (!seen) plan.novel_cameras.push_back(c);
        }
    } else {
        plan.novel_cameras = make_path(kind, params);
    }
    return plan;
}

void to_json(nlohmann::json& j, const TrajectoryPlan& plan) {
    j = nlohmann::json{{"format", "mvgrid.plan"},
                       {"version", 1},
                       {"kind", to_string(plan.kind)},
                       {"anchor_indices", plan.anchor_indices},
                       {"novel_cameras", plan.novel_cameras}};
}

void from_json(const nlohmann::json& j, TrajectoryPlan& plan) {
    require(j.value("format", "") == "mvgrid.plan", Errc::io, "not a plan document");
    plan.kind = path_kind_from_string(j.at("kind").get<std::string>());
    plan.anchor_indices = j.at("anchor_indices").get<std::vector<int>>();
    plan.novel_cameras = j.at("novel_cameras").get<std::vector<Camera>>();
}

}  // namespace mvgrid::trajectory
