#include "mvgrid/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvgrid/error.hpp"

namespace mvgrid::recon4d {

RasterOptions exact_raster_options() {
    RasterOptions o;
    o.cutoff_sigmas = 0.0;
    o.min_alpha = 0.0;
    o.min_transmittance = 0.0;
    return o;
}

namespace {

constexpr int kTile = 8;

struct Splat {
    int id;
    Vec3 cam;
    double u, v, sigma, inv_two_var, radius2;
    double opacity;
    Vec3 color;
};

struct Contribution {
    int splat;
    double alpha;
    double transmittance;  // before this splat
    double d2;
    bool clamped;
};

}  // namespace

struct Rasterization::State {
    Camera camera;
    RasterOptions options;
    std::size_t count = 0;
    std::vector<Splat> splats;  // depth order
    std::vector<Contribution> contributions;
    std::vector<std::size_t> offsets;  // per pixel, into contributions; size pixels + 1
};

Rasterization::Rasterization(std::span<const Vec3> positions, std::span<const double> scales,
                             std::span<const double> opacities, std::span<const Vec3> colors, const Camera& camera,
                             const RasterOptions& options)
    : state_(std::make_unique<State>()) {
    const std::size_t n = positions.size();
    require(scales.size() == n && opacities.size() == n && colors.size() == n, Errc::shape_mismatch,
            "rasterize: parameter arrays differ in length");
    camera.validate();
    State& st = *state_;
    st.camera = camera;
    st.options = options;
    st.count = n;
    const int w = camera.width;
    const int h = camera.height;
    const bool cutoff = options.cutoff_sigmas > 0.0;
    require(options.min_alpha >= 0.0 && options.min_alpha < options.max_alpha, Errc::invalid_argument,
            "rasterize: need 0 <= min_alpha < max_alpha");
    const double focal = 0.5 * (camera.fx + camera.fy);

    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 cam = camera.to_camera(positions[i]);
        if (cam.z() <= options.near) continue;
        Splat s;
        s.id = static_cast<int>(i);
        s.cam = cam;
        s.u = camera.fx * cam.x() / cam.z() + camera.cx;
        s.v = camera.fy * cam.y() / cam.z() + camera.cy;
        s.sigma = scales[i] * focal / cam.z();
        s.inv_two_var = 1.0 / (2.0 * s.sigma * s.sigma);
        s.opacity = opacities[i];
        s.color = colors[i];
        s.radius2 = std::numeric_limits<double>::infinity();
        if (cutoff) s.radius2 = options.cutoff_sigmas * options.cutoff_sigmas * s.sigma * s.sigma;
        if (options.min_alpha > 0.0) {
            // alpha >= min_alpha only where d^2 <= 2 sigma^2 ln(opacity / min_alpha).
            if (s.opacity < options.min_alpha) continue;
            s.radius2 = std::min(s.radius2, 2.0 * s.sigma * s.sigma * std::log(s.opacity / options.min_alpha));
        }
        if (std::isfinite(s.radius2)) {
            const double r = std::sqrt(s.radius2);
            if (s.u + r < 0.0 || s.u - r > w - 1 || s.v + r < 0.0 || s.v - r > h - 1) continue;
        }
        st.splats.push_back(s);
    }
    std::stable_sort(st.splats.begin(), st.splats.end(),
                     [](const Splat& a, const Splat& b) { return a.cam.z() < b.cam.z(); });

    const int tiles_x = (w + kTile - 1) / kTile;
    const int tiles_y = (h + kTile - 1) / kTile;
    std::vector<std::vector<int>> tiles(static_cast<std::size_t>(tiles_x) * tiles_y);
    for (int k = 0; k < static_cast<int>(st.splats.size()); ++k) {
        const Splat& s = st.splats[k];
        int tx0 = 0, tx1 = tiles_x - 1, ty0 = 0, ty1 = tiles_y - 1;
        if (std::isfinite(s.radius2)) {
            const double r = std::sqrt(s.radius2);
            tx0 = std::max(0, static_cast<int>(std::floor((s.u - r) / kTile)));
            tx1 = std::min(tiles_x - 1, static_cast<int>(std::floor((s.u + r) / kTile)));
            ty0 = std::max(0, static_cast<int>(std::floor((s.v - r) / kTile)));
            ty1 = std::min(tiles_y - 1, static_cast<int>(std::floor((s.v + r) / kTile)));
        }
        for (int ty = ty0; ty <= ty1; ++ty)
            for (int tx = tx0; tx <= tx1; ++tx) tiles[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(k);
    }

    const std::size_t pixels = static_cast<std::size_t>(w) * h;
    std::size_t expected = 0;
    for (const auto& list : tiles) expected += list.size();
    st.contributions.reserve(expected * kTile * kTile / 4);
    image_ = Image(w, h);
    accumulated_.assign(pixels, 0.0);
    transmittance_.assign(pixels, 1.0);
    st.offsets.assign(pixels + 1, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * w + x;
            st.offsets[p] = st.contributions.size();
            const auto& list = tiles[static_cast<std::size_t>(y / kTile) * tiles_x + x / kTile];
            double t = 1.0;
            double acc = 0.0;
            Vec3 c = Vec3::Zero();
            for (int k : list) {
                if (t < options.min_transmittance) break;
                const Splat& s = st.splats[k];
                const double dx = x - s.u;
                const double dy = y - s.v;
                const double d2 = dx * dx + dy * dy;
                if (d2 > s.radius2) continue;
                double alpha = s.opacity * std::exp(-d2 * s.inv_two_var);
                bool clamped = false;
                if (alpha > options.max_alpha) {
                    alpha = options.max_alpha;
                    clamped = true;
                }
                if (alpha <= 0.0 || alpha < options.min_alpha) continue;
                st.contributions.push_back(Contribution{k, alpha, t, d2, clamped});
                c += t * alpha * s.color;
                acc += t * alpha;
                t *= 1.0 - alpha;
            }
            c += Vec3::Constant(t * options.background);
            accumulated_[p] = acc;
            transmittance_[p] = t;
            for (int ch = 0; ch < 3; ++ch) image_.data[3 * p + ch] = c[ch];
        }
    }
    st.offsets[pixels] = st.contributions.size();
}

Rasterization::~Rasterization() = default;
Rasterization::Rasterization(Rasterization&&) noexcept = default;
Rasterization& Rasterization::operator=(Rasterization&&) noexcept = default;

RasterGrads Rasterization::backward(const Image& d_image) const {
    const State& st = *state_;
    const Camera& camera = st.camera;
    require(d_image.width == camera.width && d_image.height == camera.height, Errc::shape_mismatch,
            "rasterize_backward: gradient image size differs from the camera");
    const std::size_t m = st.splats.size();
    std::vector<double> d_u(m, 0.0), d_v(m, 0.0), d_sigma(m, 0.0), d_opacity(m, 0.0);
    std::vector<Vec3> d_color(m, Vec3::Zero());

    const std::size_t pixels = transmittance_.size();
    for (std::size_t p = 0; p < pixels; ++p) {
        const Vec3 g(d_image.data[3 * p], d_image.data[3 * p + 1], d_image.data[3 * p + 2]);
        if (g.isZero(0.0)) continue;
        const double x = static_cast<double>(p % camera.width);
        const double y = static_cast<double>(p / camera.width);
        // Colour of everything behind the current splat, dotted with g.
        double behind = transmittance_[p] * st.options.background * g.sum();
        for (std::size_t k = st.offsets[p + 1]; k-- > st.offsets[p];) {
            const Contribution& ct = st.contributions[k];
            const Splat& s = st.splats[ct.splat];
            const double color_g = s.color.dot(g);
            d_color[ct.splat] += ct.transmittance * ct.alpha * g;
            const double d_alpha = ct.transmittance * color_g - behind / (1.0 - ct.alpha);
            behind += ct.transmittance * ct.alpha * color_g;
            if (ct.clamped) continue;
            d_opacity[ct.splat] += d_alpha * ct.alpha / s.opacity;
            const double common = d_alpha * ct.alpha / (s.sigma * s.sigma);
            d_u[ct.splat] += common * (x - s.u);
            d_v[ct.splat] += common * (y - s.v);
            d_sigma[ct.splat] += common * ct.d2 / s.sigma;
        }
    }

    RasterGrads out;
    out.positions.assign(st.count, Vec3::Zero());
    out.scales.assign(st.count, 0.0);
    out.opacities.assign(st.count, 0.0);
    out.colors.assign(st.count, Vec3::Zero());
    out.screen.assign(st.count, 0.0);
    const double focal = 0.5 * (camera.fx + camera.fy);
    const Mat3 rot = camera.rotation();
    for (std::size_t k = 0; k < m; ++k) {
        const Splat& s = st.splats[k];
        const double z = s.cam.z();
        const Vec3 d_cam(d_u[k] * camera.fx / z, d_v[k] * camera.fy / z,
                         -d_u[k] * camera.fx * s.cam.x() / (z * z) - d_v[k] * camera.fy * s.cam.y() / (z * z) -
                             d_sigma[k] * s.sigma / z);
        out.positions[s.id] = rot * d_cam;
        out.scales[s.id] = d_sigma[k] * focal / z;
        out.opacities[s.id] = d_opacity[k];
        out.colors[s.id] = d_color[k];
        out.screen[s.id] = std::hypot(d_u[k] * 0.5 * camera.width, d_v[k] * 0.5 * camera.height);
    }
    return out;
}

Image rasterize(std::span<const Vec3> positions, std::span<const double> scales, std::span<const double> opacities,
                std::span<const Vec3> colors, const Camera& camera, const RasterOptions& options) {
    return Rasterization(positions, scales, opacities, colors, camera, options).image();
}

RasterGrads rasterize_backward(std::span<const Vec3> positions, std::span<const double> scales,
                               std::span<const double> opacities, std::span<const Vec3> colors, const Camera& camera,
                               const Image& d_image, const RasterOptions& options) {
    return Rasterization(positions, scales, opacities, colors, camera, options).backward(d_image);
}

}  // namespace mvgrid::recon4d
