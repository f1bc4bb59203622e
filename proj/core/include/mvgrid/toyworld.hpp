#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvgrid/camera.hpp"
#include "mvgrid/image.hpp"
#include "mvgrid/view_grid.hpp"

namespace mvgrid::toyworld {

enum class Shape { sphere, box };
enum class MotionType { still, linear, orbit, bounce };

struct Motion {
    MotionType type = MotionType::still;
    // linear: displacement reached at t=1; orbit: (x radius, unused, z radius);
    // bounce: peak displacement.
    Vec3 amplitude = Vec3::Zero();
    double phase = 0.0;  // radians

    /// Offset from the base position at time t.
    Vec3 offset(double t) const;
};

struct Primitive {
    Shape shape = Shape::sphere;
    Vec3 base_position = Vec3::Zero();
    double size = 0.2;  // sphere radius or box half-extent
    Vec3 albedo = Vec3::Constant(0.5);
    Motion motion;

    Vec3 position(double t) const { return base_position + motion.offset(t); }
    double bounding_radius() const;
};

struct Bounds {
    Vec3 lo = Vec3::Constant(-1.0);
    Vec3 hi = Vec3::Constant(1.0);

    bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
    double diagonal() const { return (hi - lo).norm(); }
    Vec3 center() const { return 0.5 * (lo + hi); }
};

struct SceneSpec {
    std::uint64_t seed = 0;
    std::vector<Primitive> primitives;
    // Background colour is a function of the world ray direction only:
    // lerp(bottom, top, (1 + d.y) / 2).
    Vec3 background_bottom = Vec3::Constant(0.45);
    Vec3 background_top = Vec3::Constant(0.55);
    Bounds bounds;
    Vec3 light_direction = Vec3(0.35, 0.8, -0.45).normalized();  // towards the light
    double ambient = 0.35;

    /// Per-channel colour of the unconditional "dataset mean" image.
    Vec3 mean_color() const { return 0.5 * (background_bottom + background_top); }
    Vec3 background(const Vec3& direction) const;
    void validate() const;
};

struct RenderOptions {
    int supersample = 3;  // stratified samples per pixel axis
};

/// Deterministic in seed; at least one moving primitive; distinct phases.
SceneSpec generate_scene(std::uint64_t seed, int n_primitives);

Image render(const SceneSpec& scene, const Camera& camera, double time, const RenderOptions& options = {});

/// View i = render(scene, trajectory[i], times[i]).
std::vector<View> render_input_video(const SceneSpec& scene, std::span<const Camera> trajectory,
                                     std::span<const double> times, const RenderOptions& options = {});

/// Same scene with every primitive's motion set to still.
SceneSpec frozen(const SceneSpec& scene);

void to_json(nlohmann::json& j, const SceneSpec& scene);
void from_json(const nlohmann::json& j, SceneSpec& scene);

}  // namespace mvgrid::toyworld
