#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "mvgrid/camera.hpp"
#include "mvgrid/error.hpp"
#include "mvgrid/image.hpp"
#include "mvgrid/toyworld.hpp"

namespace mvgrid::test {

// Code of the mvgrid::Error thrown by fn; records a failure if none is thrown.
inline Errc code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no mvgrid::Error thrown";
    return Errc::io;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() /
                ("mvgrid_" + name + "_" + std::to_string(std::random_device{}()));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline Image random_image(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Image img(w, h);
    for (double& v : img.data) v = u(rng);
    return img;
}

inline Camera test_camera(const Vec3& eye, int size = 32, const Vec3& target = Vec3::Zero()) {
    return Camera::look_at_fov(eye, target, 50.0, size, size);
}

// One sphere moving linearly along +x over a flat background.
inline toyworld::SceneSpec single_sphere_scene(const Vec3& amplitude) {
    toyworld::SceneSpec scene;
    toyworld::Primitive p;
    p.shape = toyworld::Shape::sphere;
    p.base_position = Vec3::Zero();
    p.size = 0.3;
    p.albedo = Vec3(0.9, 0.2, 0.1);
    p.motion.type = toyworld::MotionType::linear;
    p.motion.amplitude = amplitude;
    scene.primitives.push_back(p);
    scene.bounds.lo = Vec3::Constant(-1.2);
    scene.bounds.hi = Vec3::Constant(1.2);
    return scene;
}

}  // namespace mvgrid::test
