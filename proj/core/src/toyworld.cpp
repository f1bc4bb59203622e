#include "mvgrid/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "mvgrid/error.hpp"
#include "mvgrid/serialize.hpp"

namespace mvgrid::toyworld {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const char* shape_name(Shape s) { return s == Shape::sphere ? "sphere" : "box"; }

Shape shape_from(const std::string& s) {
    if (s == "sphere") return Shape::sphere;
    if (s == "box") return Shape::box;
    fail(Errc::invalid_argument, "unknown shape '" + s + "'");
}

const char* motion_name(MotionType m) {
    switch (m) {
        case MotionType::still: return "static";
        case MotionType::linear: return "linear";
        case MotionType::orbit: return "orbit";
        case MotionType::bounce: return "bounce";
    }
    return "static";
}

MotionType motion_from(const std::string& s) {
    if (s == "static") return MotionType::still;
    if (s == "linear") return MotionType::linear;
    if (s == "orbit") return MotionType::orbit;
    if (s == "bounce") return MotionType::bounce;
    fail(Errc::invalid_argument, "unknown motion type '" + s + "'");
}

struct Hit {
    double distance = std::numeric_limits<double>::infinity();
    Vec3 normal = Vec3::Zero();
    int primitive = -1;
};

bool intersect_sphere(const Vec3& origin, const Vec3& dir, const Vec3& center, double radius, double& t,
                      Vec3& normal) {
    const Vec3 oc = origin - center;
    const double b = oc.dot(dir);
    const double c = oc.squaredNorm() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0.0) return false;
    const double s = std::sqrt(disc);
    double hit = -b - s;
    if (hit <= 1e-9) hit = -b + s;
    if (hit <= 1e-9) return false;
    t = hit;
    normal = (origin + hit * dir - center) / radius;
    return true;
}

bool intersect_box(const Vec3& origin, const Vec3& dir, const Vec3& center, double half, double& t, Vec3& normal) {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    int axis = -1;
    double sign = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double lo = center[a] - half;
        const double hi = center[a] + half;
        if (std::abs(dir[a]) < 1e-15) {
            if (origin[a] < lo || origin[a] > hi) return false;
            continue;
        }
        double t0 = (lo - origin[a]) / dir[a];
        double t1 = (hi - origin[a]) / dir[a];
        double s = -1.0;
        if (t0 > t1) {
            std::swap(t0, t1);
            s = 1.0;
        }
        if (t0 > t_near) {
            t_near = t0;
            axis = a;
            sign = s;
        }
        t_far = std::min(t_far, t1);
        if (t_near > t_far) return false;
    }
    if (axis < 0 || t_near <= 1e-9) return false;
    t = t_near;
    normal = Vec3::Zero();
    normal[axis] = sign;
    return true;
}

// Pixel-space bounding box of a sphere fully in front of the camera. The
// extreme x/z ratios are the tangents from the origin to the sphere's
// projection on the xz plane (a disc), so the box is exact.
struct PixelBox {
    double u0, u1, v0, v1;
};

bool screen_box(const Camera& cam, const Vec3& center, double radius, PixelBox& box, bool& whole_image) {
    const Vec3 p = cam.to_camera(center);
    whole_image = false;
    if (p.z() + radius <= 0.0) return false;
    if (p.z() - radius <= 1e-6) {
        whole_image = true;
        return true;
    }
    auto extent = [&](double lateral, double focal, double principal, double& lo, double& hi) {
        const double d = std::hypot(lateral, p.z());
        const double alpha = std::asin(std::min(1.0, radius / d));
        const double theta = std::atan2(lateral, p.z());
        lo = focal * std::tan(theta - alpha) + principal;
        hi = focal * std::tan(theta + alpha) + principal;
    };
    extent(p.x(), cam.fx, cam.cx, box.u0, box.u1);
    extent(p.y(), cam.fy, cam.cy, box.v0, box.v1);
    return true;
}

}  // namespace

Vec3 Motion::offset(double t) const {
    switch (type) {
        case MotionType::still: return Vec3::Zero();
        case MotionType::linear: return amplitude * t;
        case MotionType::orbit: {
            const double a = kTwoPi * t + phase;
            return {amplitude.x() * std::cos(a), 0.0, amplitude.z() * std::sin(a)};
        }
        case MotionType::bounce: return amplitude * std::abs(std::sin(std::numbers::pi * t + phase));
    }
    return Vec3::Zero();
}

double Primitive::bounding_radius() const { return shape == Shape::sphere ? size : size * std::sqrt(3.0); }

Vec3 SceneSpec::background(const Vec3& direction) const {
    const double s = 0.5 * (1.0 + direction.y());
    return background_bottom + s * (background_top - background_bottom);
}

void SceneSpec::validate() const {
    require(!primitives.empty(), Errc::invalid_argument, "scene has no primitives");
    bool moving = false;
    for (const auto& p : primitives) {
        require(p.size > 0.0, Errc::invalid_argument, "primitive size must be positive");
        moving = moving || p.motion.type != MotionType::still;
        for (int k = 0; k <= 256; ++k) {
            require(bounds.contains(p.position(k / 256.0)), Errc::out_of_range, "primitive leaves scene bounds");
        }
    }
    require(moving, Errc::invalid_argument, "scene needs at least one moving primitive");
}

SceneSpec generate_scene(std::uint64_t seed, int n_primitives) {
    require(n_primitives >= 1, Errc::invalid_argument, "generate_scene: need at least one primitive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    SceneSpec scene;
    scene.seed = seed;
    scene.bounds = Bounds{Vec3::Constant(-1.2), Vec3::Constant(1.2)};
    for (int c = 0; c < 3; ++c) {
        scene.background_bottom[c] = 0.5 + uniform(-0.08, -0.02);
        scene.background_top[c] = 0.5 + uniform(0.02, 0.08);
    }

    for (int i = 0; i < n_primitives; ++i) {
        Primitive prim;
        prim.shape = unit(rng) < 0.6 ? Shape::sphere : Shape::box;
        prim.base_position = Vec3(uniform(-0.6, 0.6), uniform(-0.4, 0.4), uniform(-0.6, 0.6));
        prim.size = uniform(0.15, 0.3);
        prim.albedo = Vec3(uniform(0.15, 0.95), uniform(0.15, 0.95), uniform(0.15, 0.95));
        // Phases are stratified so no two primitives share one.
        prim.motion.phase = kTwoPi * (i + uniform(0.1, 0.9)) / n_primitives;

        int kind = static_cast<int>(unit(rng) * 4.0);
        if (i == 0) kind = 1 + static_cast<int>(unit(rng) * 3.0);  // first primitive always moves
        kind = std::clamp(kind, 0, 3);
        switch (kind) {
            case 0: prim.motion.type = MotionType::still; break;
            case 1: {
                prim.motion.type = MotionType::linear;
                Vec3 dir(uniform(-1, 1), uniform(-0.3, 0.3), uniform(-1, 1));
                if (dir.norm() < 1e-3) dir = Vec3::UnitX();
                prim.motion.amplitude = dir.normalized() * uniform(0.15, 0.4);
                break;
            }
            case 2: {
                prim.motion.type = MotionType::orbit;
                const double r = uniform(0.15, 0.35);
                prim.motion.amplitude = Vec3(r, 0.0, r);
                break;
            }
            default: {
                prim.motion.type = MotionType::bounce;
                prim.motion.amplitude = Vec3(0.0, uniform(0.15, 0.35), 0.0);
                break;
            }
        }
        scene.primitives.push_back(prim);
    }
    scene.validate();
    return scene;
}

Image render(const SceneSpec& scene, const Camera& camera, double time, const RenderOptions& options) {
    require(time >= 0.0 && time <= 1.0, Errc::out_of_range, "render: time outside [0,1]");
    require(options.supersample >= 1, Errc::invalid_argument, "render: supersample must be >= 1");
    const int w = camera.width;
    const int h = camera.height;
    const int ss = options.supersample;

    struct Placed {
        Vec3 center;
        PixelBox box;
        bool whole;
        const Primitive* prim;
    };
    std::vector<Placed> placed;
    for (const auto& prim : scene.primitives) {
        Placed p{prim.position(time), {}, false, &prim};
        if (!screen_box(camera, p.center, prim.bounding_radius(), p.box, p.whole)) continue;
        placed.push_back(p);
    }

    const Vec3 origin = camera.center();
    const Mat3 rot = camera.rotation();
    std::vector<double> offsets(ss);
    for (int s = 0; s < ss; ++s) offsets[s] = (s + 0.5) / ss - 0.5;
    const double inv = 1.0 / (ss * ss);

    Image image(w, h);
    std::vector<const Placed*> candidates;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            candidates.clear();
            for (const auto& p : placed) {
                if (p.whole || (x + 0.5 >= p.box.u0 - 1.0 && x - 0.5 <= p.box.u1 + 1.0 && y + 0.5 >= p.box.v0 - 1.0 &&
                                y - 0.5 <= p.box.v1 + 1.0)) {
                    candidates.push_back(&p);
                }
            }
            Vec3 acc = Vec3::Zero();
            for (int sy = 0; sy < ss; ++sy) {
                for (int sx = 0; sx < ss; ++sx) {
                    const double u = x + offsets[sx];
                    const double v = y + offsets[sy];
                    const Vec3 dir = (rot * Vec3((u - camera.cx) / camera.fx, (v - camera.cy) / camera.fy, 1.0))
                                         .normalized();
                    Hit best;
                    for (const Placed* p : candidates) {
                        double t = 0.0;
                        Vec3 n;
                        const bool hit = p->prim->shape == Shape::sphere
                                             ? intersect_sphere(origin, dir, p->center, p->prim->size, t, n)
                                             : intersect_box(origin, dir, p->center, p->prim->size, t, n);
                        if (hit && t < best.distance) {
                            best.distance = t;
                            best.normal = n;
                            best.primitive = static_cast<int>(p - placed.data());
                        }
                    }
                    if (best.primitive < 0) {
                        acc += scene.background(dir);
                    } else {
                        const double lambert = std::max(0.0, best.normal.dot(scene.light_direction));
                        acc += placed[best.primitive].prim->albedo * (scene.ambient + (1.0 - scene.ambient) * lambert);
                    }
                }
            }
            acc *= inv;
            for (int c = 0; c < 3; ++c) image.at(x, y, c) = acc[c];
        }
    }
    return image;
}

std::vector<View> render_input_video(const SceneSpec& scene, std::span<const Camera> trajectory,
                                     std::span<const double> times, const RenderOptions& options) {
    require(trajectory.size() == times.size(), Errc::invalid_argument,
            "render_input_video: trajectory and times differ in length");
    std::vector<View> views;
    views.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        views.push_back(View{render(scene, trajectory[i], times[i], options), trajectory[i], times[i]});
    }
    return views;
}

SceneSpec frozen(const SceneSpec& scene) {
    SceneSpec out = scene;
    for (auto& p : out.primitives) p.motion = Motion{};
    return out;
}

void to_json(nlohmann::json& j, const SceneSpec& scene) {
    nlohmann::json prims = nlohmann::json::array();
    for (const auto& p : scene.primitives) {
        prims.push_back({{"shape", shape_name(p.shape)},
                         {"base_position", vec3_to_json(p.base_position)},
                         {"size", p.size},
                         {"albedo", vec3_to_json(p.albedo)},
                         {"motion",
                          {{"type", motion_name(p.motion.type)},
                           {"amplitude", vec3_to_json(p.motion.amplitude)},
                           {"phase", p.motion.phase}}}});
    }
    j = nlohmann::json{{"format", "mvgrid.scene"},
                       {"version", 1},
                       {"seed", scene.seed},
                       {"primitives", prims},
                       {"background", {{"bottom", vec3_to_json(scene.background_bottom)},
                                       {"top", vec3_to_json(scene.background_top)}}},
                       {"bounds", {{"lo", vec3_to_json(scene.bounds.lo)}, {"hi", vec3_to_json(scene.bounds.hi)}}},
                       {"light_direction", vec3_to_json(scene.light_direction)},
                       {"ambient", scene.ambient}};
}

void from_json(const nlohmann::json& j, SceneSpec& scene) {
    scene = SceneSpec{};
    scene.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("primitives")) {
        Primitive prim;
        prim.shape = shape_from(p.at("shape").get<std::string>());
        prim.base_position = vec3_from_json(p.at("base_position"));
        prim.size = p.at("size").get<double>();
        prim.albedo = vec3_from_json(p.at("albedo"));
        const auto& m = p.at("motion");
        prim.motion.type = motion_from(m.at("type").get<std::string>());
        prim.motion.amplitude = vec3_from_json(m.at("amplitude"));
        prim.motion.phase = m.at("phase").get<double>();
        scene.primitives.push_back(prim);
    }
    scene.background_bottom = vec3_from_json(j.at("background").at("bottom"));
    scene.background_top = vec3_from_json(j.at("background").at("top"));
    scene.bounds.lo = vec3_from_json(j.at("bounds").at("lo"));
    scene.bounds.hi = vec3_from_json(j.at("bounds").at("hi"));
    scene.light_direction = vec3_from_json(j.at("light_direction")).normalized();
    scene.ambient = j.at("ambient").get<double>();
}

}  // namespace mvgrid::toyworld
