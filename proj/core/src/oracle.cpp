#include "mvgrid/oracle.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

#include "mvgrid/rng.hpp"

namespace mvgrid::diffusion {

namespace {

std::atomic<std::uint64_t> g_next_instance{1};

std::uint64_t camera_hash(const Camera& c) {
    std::uint64_t h = derive_seed({hash_double(c.fx), hash_double(c.fy), hash_double(c.cx), hash_double(c.cy),
                                   static_cast<std::uint64_t>(c.width), static_cast<std::uint64_t>(c.height)});
    for (int i = 0; i < 12; ++i) h = derive_seed({h, hash_double(c.world_from_camera.data()[i])});
    return h;
}

// Per-thread render cache; keeps oracle calls reentrant without locking.
struct RenderCache {
    std::unordered_map<std::uint64_t, Image> entries;
    std::size_t bytes = 0;
    static constexpr std::size_t kBudget = std::size_t{128} << 20;
};

thread_local RenderCache t_cache;

enum class Variant { full, image_only, uncond };

}  // namespace

void CorruptionSpec::validate() const {
    require(bias >= 0.0 && jitter >= 0.0, Errc::invalid_argument, "corruption amplitudes must be non-negative");
    require(jitter <= 1.0, Errc::invalid_argument, "corruption jitter must be <= 1");
    require(hypotheses >= 1, Errc::invalid_argument, "corruption needs at least one hypothesis");
}

std::vector<std::vector<double>> smooth_basis(int width, int height) {
    const std::size_t n = static_cast<std::size_t>(width) * height;
    std::vector<std::vector<double>> basis(3, std::vector<double>(n));
    const double cu = 0.5 * (width - 1);
    const double cv = 0.5 * (height - 1);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * width + x;
            basis[0][p] = 1.0;
            basis[1][p] = (x - cu) / std::max(1.0, cu);
            basis[2][p] = (y - cv) / std::max(1.0, cv);
        }
    }
    // Gram-Schmidt; a degenerate direction (1-pixel axis) collapses to zero.
    for (std::size_t k = 0; k < basis.size(); ++k) {
        for (std::size_t m = 0; m < k; ++m) {
            double dot = 0.0;
            for (std::size_t p = 0; p < n; ++p) dot += basis[k][p] * basis[m][p];
            for (std::size_t p = 0; p < n; ++p) basis[k][p] -= dot * basis[m][p];
        }
        double norm = 0.0;
        for (double v : basis[k]) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : basis[k]) v = norm > 1e-12 ? v / norm : 0.0;
    }
    return basis;
}

OracleDenoiser::OracleDenoiser(toyworld::SceneSpec scene, CorruptionSpec corruption, toyworld::RenderOptions render)
    : scene_(std::move(scene)), corruption_(corruption), render_(render), instance_id_(g_next_instance++) {
    corruption_.validate();
}

Image OracleDenoiser::cached_render(const Camera& camera, double time) const {
    const std::uint64_t key = derive_seed({instance_id_, camera_hash(camera), hash_double(time)});
    auto it = t_cache.entries.find(key);
    if (it != t_cache.entries.end()) return it->second;
    Image img = toyworld::render(scene_, camera, time, render_);
    const std::size_t bytes = img.data.size() * sizeof(double);
    if (t_cache.bytes + bytes > RenderCache::kBudget) {
        t_cache.entries.clear();
        t_cache.bytes = 0;
    }
    t_cache.bytes += bytes;
    t_cache.entries.emplace(key, img);
    return img;
}

Image OracleDenoiser::ground_truth(const Camera& camera, double time) const { return cached_render(camera, time); }

std::vector<Image> OracleDenoiser::predict(const LatentBatch& batch, const ConditioningSet& cond) const {
    batch.validate();
    cond.validate();
    const int n = batch.size();
    const double ab = batch.alpha_bar;
    require(ab > 0.0 && ab < 1.0, Errc::out_of_range, "oracle: alpha_bar must lie in (0,1)");
    const double sa = std::sqrt(ab);
    const double var_noise = 1.0 - ab;
    const double sn = std::sqrt(var_noise);

    const Variant variant = !cond.images_present ? Variant::uncond
                            : cond.times_present ? Variant::full
                                                 : Variant::image_only;
    const Vec3 mean = scene_.mean_color();

    auto center_image = [&](int target, double offset) -> Image {
        const Camera& cam = batch.target_cameras[target];
        switch (variant) {
            case Variant::uncond: return solid_image(cam.width, cam.height, mean.x(), mean.y(), mean.z());
            case Variant::image_only: {
                const double t_ref = cond.views.empty() ? batch.target_times[target] : cond.views.front().time;
                return cached_render(cam, std::clamp(t_ref + offset, 0.0, 1.0));
            }
            case Variant::full:
            default: return cached_render(cam, std::clamp(batch.target_times[target] + offset, 0.0, 1.0));
        }
    };

    auto epsilon_from = [&](const Image& z, const Image& x0) {
        Image eps(z.width, z.height);
        for (std::size_t k = 0; k < z.data.size(); ++k) eps.data[k] = (z.data[k] - sa * x0.data[k]) / sn;
        return eps;
    };

    std::vector<Image> out;
    out.reserve(n);
    if (corruption_.exact()) {
        for (int i = 0; i < n; ++i) out.push_back(epsilon_from(batch.targets[i], center_image(i, 0.0)));
        return out;
    }

    // Per-generation draws, shared by every target of the batch.
    std::mt19937_64 rng(derive_seed({corruption_.seed, batch.stream_key}));
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double drawn_offset = corruption_.jitter * uniform(rng);

    const int w = batch.targets.front().width;
    const int h = batch.targets.front().height;
    const std::size_t npix = static_cast<std::size_t>(w) * h;
    const auto basis = smooth_basis(w, h);
    const int nb = static_cast<int>(basis.size());
    const double tau = corruption_.bias * std::sqrt(static_cast<double>(npix) / nb);  // prior std per coefficient
    double drawn_coef[3][3];
    for (int c = 0; c < 3; ++c)
        for (int k = 0; k < nb; ++k) drawn_coef[c][k] = tau * normal(rng);

    Image prior_bias(w, h);
    for (std::size_t p = 0; p < npix; ++p)
        for (int c = 0; c < 3; ++c) {
            double v = 0.0;
            for (int k = 0; k < nb; ++k) v += drawn_coef[c][k] * basis[k][p];
            prior_bias.data[3 * p + c] = v;
        }

    // Time-offset hypotheses.
    std::vector<double> offsets;
    std::vector<double> log_prior;
    const int hyp = (corruption_.jitter > 0.0 && variant != Variant::uncond) ? corruption_.hypotheses : 1;
    for (int k = 0; k < hyp; ++k) {
        const double d = hyp == 1 ? drawn_offset
                                  : -corruption_.jitter + 2.0 * corruption_.jitter * k / (hyp - 1);
        offsets.push_back(d);
        const double s = 0.5 * corruption_.jitter;
        log_prior.push_back(hyp == 1 ? 0.0 : -0.5 * (d - drawn_offset) * (d - drawn_offset) / (s * s));
    }

    // Posterior over hypotheses, and per-hypothesis posterior bias correction.
    const bool with_bias = tau > 0.0;
    const double shrink = with_bias ? 1.0 / (var_noise * (var_noise / (ab * tau * tau) + n)) : 0.0;
    const double gain = with_bias ? sa / (ab * n + var_noise / (tau * tau)) : 0.0;

    std::vector<std::vector<Image>> centers(hyp);
    std::vector<double> log_weight(hyp);
    std::vector<std::array<std::array<double, 3>, 3>> correction(hyp);
    for (int k = 0; k < hyp; ++k) {
        double sq = 0.0;
        double proj[3][3] = {};
        centers[k].reserve(n);
        for (int i = 0; i < n; ++i) {
            Image center = center_image(i, offsets[k]);
            for (std::size_t q = 0; q < center.data.size(); ++q) center.data[q] += prior_bias.data[q];
            const Image& z = batch.targets[i];
            for (std::size_t p = 0; p < npix; ++p) {
                for (int c = 0; c < 3; ++c) {
                    const double y = z.data[3 * p + c] - sa * center.data[3 * p + c];
                    sq += y * y;
                    if (with_bias)
                        for (int b = 0; b < nb; ++b) proj[c][b] += basis[b][p] * y;
                }
            }
            centers[k].push_back(std::move(center));
        }
        double explained = 0.0;
        for (int c = 0; c < 3; ++c)
            for (int b = 0; b < nb; ++b) {
                explained += proj[c][b] * proj[c][b];
                correction[k][c][b] = gain * proj[c][b];
            }
        log_weight[k] = log_prior[k] - 0.5 * (sq / var_noise - shrink * explained);
    }
    const double max_log = *std::max_element(log_weight.begin(), log_weight.end());
    double total = 0.0;
    for (double& lw : log_weight) {
        lw = std::exp(lw - max_log);
        total += lw;
    }

    for (int i = 0; i < n; ++i) {
        Image x0(w, h);
        for (int k = 0; k < hyp; ++k) {
            const double wk = log_weight[k] / total;
            if (wk == 0.0) continue;
            const Image& center = centers[k][i];
            for (std::size_t p = 0; p < npix; ++p)
                for (int c = 0; c < 3; ++c) {
                    double v = center.data[3 * p + c];
                    for (int b = 0; b < nb; ++b) v += correction[k][c][b] * basis[b][p];
                    x0.data[3 * p + c] += wk * v;
                }
        }
        out.push_back(epsilon_from(batch.targets[i], x0));
    }
    return out;
}

std::vector<Image> FixedTargetDenoiser::predict(const LatentBatch& batch, const ConditioningSet&) const {
    require(batch.size() == static_cast<int>(x0_.size()), Errc::shape_mismatch,
            "fixed-target denoiser: batch size differs from the stored targets");
    std::vector<Image> out;
    out.reserve(x0_.size());
    for (std::size_t i = 0; i < x0_.size(); ++i)
        out.push_back(consistent_epsilon(batch.targets[i], x0_[i], batch.alpha_bar));
    return out;
}

}  // namespace mvgrid::diffusion
