#include "mvgrid/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "mvgrid/error.hpp"
#include "mvgrid/rng.hpp"

namespace mvgrid::recon4d {

void ReconConfig::validate() const {
    require(weights.l1 >= 0.0 && weights.dssim >= 0.0, Errc::invalid_argument, "recon: loss weights must be >= 0");
    require(densify_grad_threshold > 0.0 && prune_opacity > 0.0, Errc::invalid_argument,
            "recon: thresholds must be positive");
    require(batch_size >= 1 && phase1_iters >= 0 && phase2_iters >= 0, Errc::invalid_argument,
            "recon: batch size >= 1 and iteration counts >= 0 required");
    require(lr_position >= 0 && lr_position_final >= 0 && lr_color >= 0 && lr_opacity >= 0 && lr_scale >= 0 &&
                lr_field >= 0,
            Errc::invalid_argument, "recon: learning rates must be >= 0");
    require(densify_interval >= 1 && split_factor > 1.0 && percent_dense > 0.0 && max_gaussians >= 1,
            Errc::invalid_argument, "recon: bad densification settings");
    require(init_points >= 1 && init_scale > 0.0 && init_opacity > 0.0 && init_opacity < 1.0, Errc::invalid_argument,
            "recon: bad initialisation settings");
}

double generated_multiplier(const ReconConfig& cfg, int phase2_step) {
    if (cfg.phase2_iters <= 0) return cfg.generated_multiplier_start;
    const double f = static_cast<double>(phase2_step) / cfg.phase2_iters;
    return cfg.generated_multiplier_start + (cfg.generated_multiplier_end - cfg.generated_multiplier_start) * f;
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-15;

struct Adam {
    std::vector<double> m, v;

    void resize(std::size_t n) {
        m.assign(n, 0.0);
        v.assign(n, 0.0);
    }

    void step(double* param, const double* grad, std::size_t n, double lr, int t) {
        const double c1 = 1.0 - std::pow(kBeta1, t);
        const double c2 = 1.0 - std::pow(kBeta2, t);
        for (std::size_t i = 0; i < n; ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
            param[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
        }
    }

    // Keeps the moments of surviving entries; new entries start at zero.
    void remap(std::span<const int> origin, int width) {
        std::vector<double> nm(origin.size() * width, 0.0), nv(origin.size() * width, 0.0);
        for (std::size_t i = 0; i < origin.size(); ++i) {
            if (origin[i] < 0) continue;
            for (int k = 0; k < width; ++k) {
                nm[i * width + k] = m[origin[i] * width + k];
                nv[i * width + k] = v[origin[i] * width + k];
            }
        }
        m = std::move(nm);
        v = std::move(nv);
    }
};

struct CloudGrad {
    std::vector<Vec3> positions;
    std::vector<double> log_scales;
    std::vector<double> opacity_logits;
    std::vector<Vec3> colors;

    void reset(int n) {
        positions.assign(n, Vec3::Zero());
        log_scales.assign(n, 0.0);
        opacity_logits.assign(n, 0.0);
        colors.assign(n, Vec3::Zero());
    }
};

}  // namespace

ReconResult optimize(std::span<const Frame> dataset, const ReconConfig& cfg, const Aabb& box, std::uint64_t seed,
                     const GaussianCloud* initial, const ProgressFn& progress) {
    cfg.validate();
    require(!dataset.empty(), Errc::invalid_argument, "optimize: empty dataset");
    for (const Frame& f : dataset) f.view.validate();
    std::vector<int> phase1_pool;
    std::vector<int> phase2_pool(dataset.size());
    std::iota(phase2_pool.begin(), phase2_pool.end(), 0);
    for (std::size_t i = 0; i < dataset.size(); ++i)
        if (dataset[i].view.time == 0.0) phase1_pool.push_back(static_cast<int>(i));
    require(cfg.phase1_iters == 0 || !phase1_pool.empty(), Errc::invalid_argument,
            "optimize: phase 1 needs views at t = 0");

    const double diagonal = box.diagonal();
    ReconResult result;
    result.cloud = initial ? *initial
                           : random_cloud(cfg.init_points, box, cfg.init_scale * diagonal, cfg.init_opacity,
                                          derive_seed({seed, 1}));
    result.cloud.validate();
    result.field = DeformationField(box, cfg.field_resolution, cfg.field_features, derive_seed({seed, 2}));
    GaussianCloud& cloud = result.cloud;
    DeformationField& field = result.field;

    Adam adam_pos, adam_scale, adam_opacity, adam_color, adam_head;
    std::array<Adam, DeformationField::kPlanes> adam_planes;
    auto resize_cloud_state = [&] {
        adam_pos.resize(3 * cloud.size());
        adam_scale.resize(cloud.size());
        adam_opacity.resize(cloud.size());
        adam_color.resize(3 * cloud.size());
    };
    resize_cloud_state();
    for (int p = 0; p < DeformationField::kPlanes; ++p) adam_planes[p].resize(field.plane(p).size());
    adam_head.resize(field.head().size());
    int field_steps = 0;

    DensifyStats stats;
    stats.reset(cloud.size());
    CloudGrad grad;
    DeformationField::Gradient field_grad;

    std::mt19937_64 rng(derive_seed({seed, 3}));
    std::vector<int> order;
    std::size_t cursor = 0;
    int current_phase = 0;

    const int total = cfg.phase1_iters + cfg.phase2_iters;
    for (int step = 0; step < total; ++step) {
        const bool phase2 = step >= cfg.phase1_iters;
        const int phase = phase2 ? 2 : 1;
        const std::vector<int>& pool = phase2 ? phase2_pool : phase1_pool;
        if (phase != current_phase) {
            current_phase = phase;
            order = pool;
            cursor = order.size();
        }
        const int phase2_step = step - cfg.phase1_iters;
        const double gen_mult = phase2 ? generated_multiplier(cfg, phase2_step) : cfg.generated_multiplier_start;

        grad.reset(cloud.size());
        if (phase2) field_grad.reset(field);
        const std::vector<double> scales = cloud.scales();
        const std::vector<double> opacities = cloud.opacities();
        double batch_loss = 0.0;
        const int batch = std::min<int>(cfg.batch_size, static_cast<int>(pool.size()));
        for (int b = 0; b < batch; ++b) {
            if (cursor >= order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const Frame& frame = dataset[order[cursor++]];
            const double t = frame.view.time;
            const std::vector<Vec3> positions = phase2 ? deform(cloud, field, t) : cloud.positions;
            const Rasterization raster(positions, scales, opacities, cloud.colors, frame.view.camera, cfg.raster);
            const Image& render = raster.image();
            const double mult = frame.provenance == FillState::input ? cfg.input_multiplier : gen_mult;
            const LossResult loss = photometric_loss(render, frame.view.image, cfg.weights, mult / batch);
            batch_loss += loss.value;
            const RasterGrads g = raster.backward(loss.grad);
            for (int i = 0; i < cloud.size(); ++i) {
                Vec3 d_pos = g.positions[i];
                if (phase2 && !d_pos.isZero(0.0))
                    d_pos += field.backward(cloud.positions[i], t, g.positions[i], field_grad);
                grad.positions[i] += d_pos;
                grad.log_scales[i] += g.scales[i] * scales[i];
                grad.opacity_logits[i] += g.opacities[i] * opacities[i] * (1.0 - opacities[i]);
                grad.colors[i] += g.colors[i];
                if (g.screen[i] > 0.0) {
                    // Per-view magnitude, independent of the batch averaging.
                    stats.grad_sum[i] += g.screen[i] * batch;
                    stats.count[i] += 1;
                }
            }
        }

        const int t_adam = step + 1;
        const double progress_frac = total > 1 ? static_cast<double>(step) / (total - 1) : 0.0;
        const double lr_pos = diagonal * cfg.lr_position *
                              std::pow(cfg.lr_position_final / cfg.lr_position, progress_frac);
        if (cloud.size() > 0) {
            adam_pos.step(cloud.positions.front().data(), grad.positions.front().data(), 3 * cloud.size(), lr_pos,
                          t_adam);
            adam_scale.step(cloud.log_scales.data(), grad.log_scales.data(), cloud.size(), cfg.lr_scale, t_adam);
            adam_opacity.step(cloud.opacity_logits.data(), grad.opacity_logits.data(), cloud.size(),
                              cfg.lr_opacity, t_adam);
            adam_color.step(cloud.colors.front().data(), grad.colors.front().data(), 3 * cloud.size(),
                            cfg.lr_color, t_adam);
        }
        if (phase2) {
            ++field_steps;
            for (int p = 0; p < DeformationField::kPlanes; ++p)
                adam_planes[p].step(field.plane(p).data(), field_grad.planes[p].data(), field.plane(p).size(),
                                    cfg.lr_field, field_steps);
            adam_head.step(field.head().data(), field_grad.head.data(), field.head().size(), cfg.lr_field,
                           field_steps);
        }

        if ((step + 1) % cfg.densify_interval == 0 && step + 1 < std::min(cfg.densify_until, total)) {
            DensifyResult d =
                densify_prune(cloud, stats, cfg, diagonal, derive_seed({seed, 4, static_cast<std::uint64_t>(step)}));
            cloud = std::move(d.cloud);
            adam_pos.remap(d.origin, 3);
            adam_scale.remap(d.origin, 1);
            adam_opacity.remap(d.origin, 1);
            adam_color.remap(d.origin, 3);
            stats.reset(cloud.size());
        }

        TrainingLogEntry entry{step, phase, batch_loss, gen_mult, cloud.size()};
        result.log.push_back(entry);
        if (progress) progress(entry);
    }
    return result;
}

Image render_model(const GaussianCloud& cloud, const DeformationField& field, const Camera& camera, double t,
                   const RasterOptions& options) {
    return rasterize(deform(cloud, field, t), cloud.scales(), cloud.opacities(), cloud.colors, camera, options);
}

void write_training_csv(const std::filesystem::path& path, std::span<const TrainingLogEntry> log) {
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::io, "cannot write " + path.string());
    out << "step,phase,loss,generated_multiplier,gaussians\n";
    out.precision(10);
    for (const auto& e : log)
        out << e.step << ',' << e.phase << ',' << e.loss << ',' << e.generated_multiplier << ',' << e.gaussians << '\n';
}

}  // namespace mvgrid::recon4d
