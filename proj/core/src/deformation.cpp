#include "mvgrid/deformation.hpp"

#include <cmath>
#include <random>

#include "mvgrid/error.hpp"

namespace mvgrid::recon4d {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double GaussianCloud::scale(int i) const { return std::exp(log_scales[i]); }
double GaussianCloud::opacity(int i) const { return sigmoid(opacity_logits[i]); }

std::vector<double> GaussianCloud::scales() const {
    std::vector<double> out(log_scales.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_scales[i]);
    return out;
}

std::vector<double> GaussianCloud::opacities() const {
    std::vector<double> out(opacity_logits.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid(opacity_logits[i]);
    return out;
}

void GaussianCloud::push_back(const Vec3& position, double log_scale, double opacity_logit, const Vec3& color) {
    positions.push_back(position);
    log_scales.push_back(log_scale);
    opacity_logits.push_back(opacity_logit);
    colors.push_back(color);
}

void GaussianCloud::validate() const {
    const std::size_t n = positions.size();
    require(log_scales.size() == n && opacity_logits.size() == n && colors.size() == n, Errc::shape_mismatch,
            "gaussian cloud: parameter arrays differ in length");
    for (std::size_t i = 0; i < n; ++i) {
        require(positions[i].allFinite() && colors[i].allFinite() && std::isfinite(log_scales[i]) &&
                    std::isfinite(opacity_logits[i]),
                Errc::invalid_argument, "gaussian cloud: non-finite parameter");
    }
}

GaussianCloud random_cloud(int count, const Aabb& box, double scale, double opacity, std::uint64_t seed) {
    require(count >= 0 && scale > 0.0 && opacity > 0.0 && opacity < 1.0, Errc::invalid_argument,
            "random_cloud: bad parameters");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    GaussianCloud cloud;
    for (int i = 0; i < count; ++i) {
        Vec3 p;
        for (int d = 0; d < 3; ++d) p[d] = box.lo[d] + (box.hi[d] - box.lo[d]) * unit(rng);
        cloud.push_back(p, std::log(scale), logit(opacity), Vec3::Constant(0.5));
    }
    return cloud;
}

DeformationField::DeformationField(const Aabb& box, int resolution, int features, std::uint64_t seed)
    : box_(box), resolution_(resolution), features_(features) {
    require(resolution >= 2 && features >= 1 && features <= kMaxFeatures, Errc::invalid_argument,
            "field: resolution >= 2 and features in [1, 32] required");
    require((box.hi.array() > box.lo.array()).all(), Errc::invalid_argument, "field: empty box");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> init(0.1, 0.5);
    const std::size_t n = static_cast<std::size_t>(resolution) * resolution * features;
    for (int p = 0; p < kPlanes; ++p) {
        planes_[p].resize(n);
        const bool temporal = kAxes[p][1] == 3;
        for (double& v : planes_[p]) v = temporal ? 1.0 : init(rng);
    }
    head_.assign(static_cast<std::size_t>(3) * features, 0.0);
}

std::size_t DeformationField::parameter_count() const {
    std::size_t n = head_.size();
    for (const auto& p : planes_) n += p.size();
    return n;
}

double& DeformationField::parameter(std::size_t index) {
    for (auto& p : planes_) {
        if (index < p.size()) return p[index];
        index -= p.size();
    }
    return head_.at(index);
}

DeformationField::Sample DeformationField::locate(const Vec3& position, double t) const {
    Sample s{};
    const double top = resolution_ - 1;
    double grid[4];
    for (int d = 0; d < 4; ++d) {
        const double lo = d < 3 ? box_.lo[d] : 0.0;
        const double hi = d < 3 ? box_.hi[d] : 1.0;
        const double raw = ((d < 3 ? position[d] : t) - lo) / (hi - lo);
        s.inside[d] = raw > 0.0 && raw < 1.0;
        s.coord_scale[d] = top / (hi - lo);
        grid[d] = std::clamp(raw, 0.0, 1.0) * top;
    }
    for (int p = 0; p < kPlanes; ++p) {
        for (int k = 0; k < 2; ++k) {
            const double g = grid[kAxes[p][k]];
            const int i0 = std::min(static_cast<int>(std::floor(g)), resolution_ - 2);
            s.i0[p][k] = i0;
            s.frac[p][k] = g - i0;
        }
    }
    return s;
}

void DeformationField::plane_value(int p, const Sample& s, double* out) const {
    const int a = s.i0[p][0];
    const int b = s.i0[p][1];
    const double fa = s.frac[p][0];
    const double fb = s.frac[p][1];
    const double w[4] = {(1 - fa) * (1 - fb), fa * (1 - fb), (1 - fa) * fb, fa * fb};
    const std::size_t base[4] = {static_cast<std::size_t>(b * resolution_ + a) * features_,
                                 static_cast<std::size_t>(b * resolution_ + a + 1) * features_,
                                 static_cast<std::size_t>((b + 1) * resolution_ + a) * features_,
                                 static_cast<std::size_t>((b + 1) * resolution_ + a + 1) * features_};
    const auto& plane = planes_[p];
    for (int f = 0; f < features_; ++f)
        out[f] = w[0] * plane[base[0] + f] + w[1] * plane[base[1] + f] + w[2] * plane[base[2] + f] +
                 w[3] * plane[base[3] + f];
}

Vec3 DeformationField::offset(const Vec3& position, double t) const {
    if (resolution_ == 0) return Vec3::Zero();
    const Sample s = locate(position, t);
    std::array<double, kMaxFeatures> feat;
    std::array<double, kMaxFeatures> value;
    feat.fill(1.0);
    for (int p = 0; p < kPlanes; ++p) {
        plane_value(p, s, value.data());
        for (int f = 0; f < features_; ++f) feat[f] *= value[f];
    }
    Vec3 out = Vec3::Zero();
    for (int r = 0; r < 3; ++r)
        for (int f = 0; f < features_; ++f) out[r] += head_[r * features_ + f] * feat[f];
    return out;
}

void DeformationField::Gradient::reset(const DeformationField& field) {
    for (int p = 0; p < kPlanes; ++p) planes[p].assign(field.planes_[p].size(), 0.0);
    head.assign(field.head_.size(), 0.0);
}

Vec3 DeformationField::backward(const Vec3& position, double t, const Vec3& d_offset, Gradient& grad) const {
    if (resolution_ == 0) return Vec3::Zero();
    const Sample s = locate(position, t);
    const int F = features_;
    std::array<double, kPlanes * kMaxFeatures> values;
    for (int p = 0; p < kPlanes; ++p) plane_value(p, s, values.data() + p * F);
    std::array<double, kMaxFeatures> feat;
    feat.fill(1.0);
    for (int p = 0; p < kPlanes; ++p)
        for (int f = 0; f < F; ++f) feat[f] *= values[p * F + f];

    // d L / d feat
    std::array<double, kMaxFeatures> d_feat;
    d_feat.fill(0.0);
    for (int r = 0; r < 3; ++r)
        for (int f = 0; f < F; ++f) {
            grad.head[r * F + f] += d_offset[r] * feat[f];
            d_feat[f] += d_offset[r] * head_[r * F + f];
        }

    double d_coord[4] = {0.0, 0.0, 0.0, 0.0};
    for (int p = 0; p < kPlanes; ++p) {
        // Product of the other planes' features.
        std::array<double, kMaxFeatures> d_value;
        for (int f = 0; f < F; ++f) {
            double others = 1.0;
            for (int q = 0; q < kPlanes; ++q)
                if (q != p) others *= values[q * F + f];
            d_value[f] = d_feat[f] * others;
        }
        const int a = s.i0[p][0];
        const int b = s.i0[p][1];
        const double fa = s.frac[p][0];
        const double fb = s.frac[p][1];
        const double w[4] = {(1 - fa) * (1 - fb), fa * (1 - fb), (1 - fa) * fb, fa * fb};
        const std::size_t base[4] = {static_cast<std::size_t>(b * resolution_ + a) * F,
                                     static_cast<std::size_t>(b * resolution_ + a + 1) * F,
                                     static_cast<std::size_t>((b + 1) * resolution_ + a) * F,
                                     static_cast<std::size_t>((b + 1) * resolution_ + a + 1) * F};
        const auto& plane = planes_[p];
        double d_fa = 0.0;
        double d_fb = 0.0;
        for (int f = 0; f < F; ++f) {
            for (int c = 0; c < 4; ++c) grad.planes[p][base[c] + f] += w[c] * d_value[f];
            const double v00 = plane[base[0] + f], v10 = plane[base[1] + f];
            const double v01 = plane[base[2] + f], v11 = plane[base[3] + f];
            d_fa += d_value[f] * ((1 - fb) * (v10 - v00) + fb * (v11 - v01));
            d_fb += d_value[f] * ((1 - fa) * (v01 - v00) + fa * (v11 - v10));
        }
        d_coord[kAxes[p][0]] += d_fa;
        d_coord[kAxes[p][1]] += d_fb;
    }
    Vec3 d_position;
    for (int d = 0; d < 3; ++d) d_position[d] = s.inside[d] ? d_coord[d] * s.coord_scale[d] : 0.0;
    return d_position;
}

std::vector<Vec3> deform(const GaussianCloud& cloud, const DeformationField& field, double t) {
    require(t >= 0.0 && t <= 1.0, Errc::out_of_range, "deform: t outside [0,1]");
    std::vector<Vec3> out(cloud.positions.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cloud.positions[i] + field.offset(cloud.positions[i], t);
    return out;
}

}  // namespace mvgrid::recon4d
