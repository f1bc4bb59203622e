#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "mvgrid/camera.hpp"

namespace mvgrid::recon4d {

struct Aabb {
    Vec3 lo = Vec3::Constant(-1.0);
    Vec3 hi = Vec3::Constant(1.0);

    Vec3 extent() const { return hi - lo; }
    double diagonal() const { return extent().norm(); }

    friend bool operator==(const Aabb&, const Aabb&) = default;
};

/// Canonical isotropic Gaussians in raw (optimised) parameterisation.
struct GaussianCloud {
    std::vector<Vec3> positions;
    std::vector<double> log_scales;
    std::vector<double> opacity_logits;
    std::vector<Vec3> colors;

    int size() const { return static_cast<int>(positions.size()); }
    double scale(int i) const;
    double opacity(int i) const;
    std::vector<double> scales() const;
    std::vector<double> opacities() const;

    void push_back(const Vec3& position, double log_scale, double opacity_logit, const Vec3& color);
    void validate() const;

    friend bool operator==(const GaussianCloud&, const GaussianCloud&) = default;
};

double sigmoid(double x);
double logit(double p);

/// Uniform random positions in the box; equal scale, opacity and grey colour.
GaussianCloud random_cloud(int count, const Aabb& box, double scale, double opacity, std::uint64_t seed);

/// Hex-plane field: six R x R planes of F features over (x,y,z,t), pairs
/// xy, xz, yz, xt, yt, zt. Features of the six planes are multiplied
/// elementwise; a 3 x F linear head (no bias) maps them to a position offset.
/// Coordinates outside the box are clamped to it.
class DeformationField {
public:
    static constexpr int kPlanes = 6;
    static constexpr int kMaxFeatures = 32;
    static constexpr std::array<std::array<int, 2>, kPlanes> kAxes{{{0, 1}, {0, 2}, {1, 2}, {0, 3}, {1, 3}, {2, 3}}};

    DeformationField() = default;
    /// Spatial planes uniform in [0.1, 0.5], time planes 1, head 0.
    DeformationField(const Aabb& box, int resolution, int features, std::uint64_t seed);

    int resolution() const { return resolution_; }
    int features() const { return features_; }
    const Aabb& box() const { return box_; }

    std::vector<double>& plane(int p) { return planes_[p]; }
    const std::vector<double>& plane(int p) const { return planes_[p]; }
    std::vector<double>& head() { return head_; }  // row-major 3 x F
    const std::vector<double>& head() const { return head_; }

    /// Flattened view of all parameters: planes (in order) then head.
    std::size_t parameter_count() const;
    double& parameter(std::size_t index);

    Vec3 offset(const Vec3& position, double t) const;

    struct Gradient {
        std::array<std::vector<double>, kPlanes> planes;
        std::vector<double> head;
        void reset(const DeformationField& field);
    };

    /// Accumulates d L / d parameters into grad given d L / d offset, and
    /// returns d offset / d position applied to that vector (d L / d position
    /// through the field).
    Vec3 backward(const Vec3& position, double t, const Vec3& d_offset, Gradient& grad) const;

    friend bool operator==(const DeformationField&, const DeformationField&) = default;

private:
    struct Sample {
        int i0[kPlanes][2];
        double frac[kPlanes][2];
        bool inside[4];
        double coord_scale[4];
    };
    Sample locate(const Vec3& position, double t) const;
    void plane_value(int p, const Sample& s, double* out) const;

    Aabb box_;
    int resolution_ = 0;
    int features_ = 0;
    std::array<std::vector<double>, kPlanes> planes_;  // R x R x F, index (b * R + a) * F + f
    std::vector<double> head_;
};

/// Positions moved by the field at time t.
std::vector<Vec3> deform(const GaussianCloud& cloud, const DeformationField& field, double t);

}  // namespace mvgrid::recon4d
