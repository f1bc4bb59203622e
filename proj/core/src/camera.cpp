#include "mvgrid/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mvgrid/error.hpp"

namespace mvgrid {

const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::behind_camera: return "behind_camera";
        case Errc::ordering: return "ordering";
        case Errc::missing_cell: return "missing_cell";
        case Errc::shape_mismatch: return "shape_mismatch";
        case Errc::degenerate_input: return "degenerate_input";
        case Errc::out_of_range: return "out_of_range";
        case Errc::io: return "io";
    }
    return "unknown";
}

Vec3 Camera::ray_direction(double u, double v) const {
    const Vec3 local((u - cx) / fx, (v - cy) / fy, 1.0);
    return (rotation() * local).normalized();
}

void Camera::validate() const {
    const Mat3 r = rotation();
    const double ortho_err = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    require(ortho_err <= 1e-6, Errc::invalid_argument, "camera rotation is not orthonormal");
    require(r.determinant() > 0.0, Errc::invalid_argument, "camera rotation is a reflection");
    const Eigen::RowVector4d bottom = world_from_camera.row(3);
    require(bottom.isApprox(Eigen::RowVector4d(0, 0, 0, 1)), Errc::invalid_argument,
            "camera transform is not rigid");
    require(fx > 0.0 && fy > 0.0, Errc::invalid_argument, "focal lengths must be positive");
    require(width > 0 && height > 0, Errc::invalid_argument, "image size must be positive");
    require(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height, Errc::invalid_argument,
            "principal point outside the image");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy, double cx,
                       double cy, int width, int height) {
    const Vec3 delta = target - eye;
    require(delta.norm() > 1e-12, Errc::invalid_argument, "look_at: eye coincides with target");
    const Vec3 forward = delta.normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-9) {
        // Looking along the up vector; pick any perpendicular reference.
        const Vec3 alt = std::abs(forward.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitZ();
        right = forward.cross(alt);
    }
    right.normalize();
    const Vec3 down = forward.cross(right);

    Camera cam;
    cam.world_from_camera.setIdentity();
    cam.world_from_camera.block<3, 1>(0, 0) = right;
    cam.world_from_camera.block<3, 1>(0, 1) = down;
    cam.world_from_camera.block<3, 1>(0, 2) = forward;
    cam.world_from_camera.block<3, 1>(0, 3) = eye;
    cam.fx = fx;
    cam.fy = fy;
    cam.cx = cx;
    cam.cy = cy;
    cam.width = width;
    cam.height = height;
    return cam;
}

Camera Camera::look_at_fov(const Vec3& eye, const Vec3& target, double fov_x_deg, int width, int height,
                           const Vec3& up) {
    require(fov_x_deg > 0.0 && fov_x_deg < 180.0, Errc::invalid_argument, "field of view out of range");
    const double f = 0.5 * width / std::tan(0.5 * fov_x_deg * std::numbers::pi / 180.0);
    return look_at(eye, target, up, f, f, 0.5 * (width - 1), 0.5 * (height - 1), width, height);
}

bool operator==(const Camera& a, const Camera& b) {
    return a.world_from_camera == b.world_from_camera && a.fx == b.fx && a.fy == b.fy && a.cx == b.cx &&
           a.cy == b.cy && a.width == b.width && a.height == b.height;
}

Projection project(const Vec3& point, const Camera& camera) {
    const Vec3 p = camera.to_camera(point);
    if (p.z() <= kMinDepth) {
        std::ostringstream msg;
        msg << "point at depth " << p.z() << " is at or behind the camera plane";
        fail(Errc::behind_camera, msg.str());
    }
    return {camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy, p.z()};
}

Vec3 unproject(double u, double v, double depth, const Camera& camera) {
    const Vec3 local((u - camera.cx) / camera.fx * depth, (v - camera.cy) / camera.fy * depth, depth);
    return camera.to_world(local);
}

double rotation_angle(const Camera& a, const Camera& b) {
    const Mat3 rel = a.rotation().transpose() * b.rotation();
    const double c = std::clamp(0.5 * (rel.trace() - 1.0), -1.0, 1.0);
    return std::acos(c);
}

}  // namespace mvgrid
