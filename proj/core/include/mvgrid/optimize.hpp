#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "mvgrid/deformation.hpp"
#include "mvgrid/photometric.hpp"
#include "mvgrid/rasterizer.hpp"
#include "mvgrid/view_grid.hpp"

namespace mvgrid::recon4d {

struct ReconConfig {
    LossWeights weights;
    double densify_grad_threshold = 0.0004;
    int batch_size = 4;
    int phase1_iters = 500;
    int phase2_iters = 2500;
    double generated_multiplier_start = 1.0;
    double generated_multiplier_end = 0.5;
    double input_multiplier = 1.0;

    // Adam learning rates; positions are scaled by the box diagonal and decay
    // log-linearly to lr_position_final over the run.
    double lr_position = 1.6e-4;
    double lr_position_final = 1.6e-6;
    double lr_color = 2.5e-3;
    double lr_opacity = 5e-2;
    double lr_scale = 5e-3;
    double lr_field = 1e-3;

    int densify_interval = 100;
    int densify_until = 2000;  // global step after which densification stops
    double prune_opacity = 0.005;
    double percent_dense = 0.01;  // clone when scale <= percent_dense * box diagonal
    double split_factor = 1.6;
    int max_gaussians = 6000;

    int init_points = 1000;
    double init_scale = 0.02;  // fraction of the box diagonal
    double init_opacity = 0.1;
    int field_resolution = 32;
    int field_features = 8;
    RasterOptions raster;

    void validate() const;
};

/// Generated-view loss multiplier at phase-2 step s (linear anneal).
double generated_multiplier(const ReconConfig& cfg, int phase2_step);

struct DensifyStats {
    std::vector<double> grad_sum;  // accumulated screen-space position gradient norms
    std::vector<int> count;        // views in which the Gaussian was visible

    void reset(int n);
};

struct DensifyResult {
    GaussianCloud cloud;
    std::vector<int> origin;  // per output Gaussian: surviving source index, or -1 if new
    int cloned = 0;
    int split = 0;
    int pruned = 0;
};

/// Clone (small) or split in two (large, child scale / split_factor) every
/// Gaussian whose mean gradient exceeds the threshold, then drop those with
/// opacity below prune_opacity.
DensifyResult densify_prune(const GaussianCloud& cloud, const DensifyStats& stats, const ReconConfig& cfg,
                            double scene_diagonal, std::uint64_t seed);

struct TrainingLogEntry {
    int step = 0;
    int phase = 1;
    double loss = 0.0;
    double generated_multiplier = 1.0;
    int gaussians = 0;
};

struct ReconResult {
    GaussianCloud cloud;
    DeformationField field;
    std::vector<TrainingLogEntry> log;
};

using ProgressFn = std::function<void(const TrainingLogEntry&)>;

/// Two-phase optimisation. Phase 1 trains only the cloud on the t = 0 views;
/// phase 2 trains cloud and field on all views. Deterministic in seed.
ReconResult optimize(std::span<const Frame> dataset, const ReconConfig& cfg, const Aabb& box, std::uint64_t seed,
                     const GaussianCloud* initial = nullptr, const ProgressFn& progress = {});

Image render_model(const GaussianCloud& cloud, const DeformationField& field, const Camera& camera, double t,
                   const RasterOptions& options = {});

void save_checkpoint(const std::filesystem::path& path, const GaussianCloud& cloud, const DeformationField& field);
std::pair<GaussianCloud, DeformationField> load_checkpoint(const std::filesystem::path& path);

void write_training_csv(const std::filesystem::path& path, std::span<const TrainingLogEntry> log);

}  // namespace mvgrid::recon4d
