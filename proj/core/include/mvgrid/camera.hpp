#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace mvgrid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Pinhole camera. Convention: world_from_camera maps camera coordinates to
/// world coordinates; the camera frame is right-handed with +x right, +y down
/// and +z forward (looking direction). Pixel (col, row) is sampled at
/// (u, v) = (col, row).
struct Camera {
    Mat4 world_from_camera = Mat4::Identity();
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    Mat3 rotation() const { return world_from_camera.topLeftCorner<3, 3>(); }
    Vec3 center() const { return world_from_camera.topRightCorner<3, 1>(); }
    Vec3 forward() const { return rotation().col(2); }

    Vec3 to_camera(const Vec3& world) const { return rotation().transpose() * (world - center()); }
    Vec3 to_world(const Vec3& cam) const { return rotation() * cam + center(); }

    /// Unit world-space direction of the ray through pixel coordinate (u, v).
    Vec3 ray_direction(double u, double v) const;

    /// Throws Errc::invalid_argument when an invariant is violated.
    void validate() const;

    /// Camera at `eye` looking at `target`, with image-up aligned to `up`.
    static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
                          double cx, double cy, int width, int height);

    /// Same intrinsics model from a horizontal field of view, principal point at the image centre.
    static Camera look_at_fov(const Vec3& eye, const Vec3& target, double fov_x_deg, int width, int height,
                              const Vec3& up = Vec3::UnitY());

    friend bool operator==(const Camera& a, const Camera& b);
};

struct Projection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;
};

inline constexpr double kMinDepth = 1e-8;

/// Pinhole projection; throws Errc::behind_camera when depth <= 1e-8.
Projection project(const Vec3& point, const Camera& camera);

/// Inverse of project for a known depth.
Vec3 unproject(double u, double v, double depth, const Camera& camera);

/// Rotation angle between the orientations of two cameras, radians.
double rotation_angle(const Camera& a, const Camera& b);

}  // namespace mvgrid
