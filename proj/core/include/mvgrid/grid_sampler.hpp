#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvgrid/diffusion.hpp"
#include "mvgrid/trajectory.hpp"
#include "mvgrid/view_grid.hpp"

namespace mvgrid::gridsampler {

enum class PassKind { multiview, temporal };

struct PassSpec {
    PassKind kind = PassKind::multiview;
    int level = 25;  // SDEdit initialisation level; 25 = pure noise

    friend bool operator==(const PassSpec&, const PassSpec&) = default;
};

/// "mv:25,t:16,mv:8" -> passes. Throws Errc::invalid_argument on bad syntax.
std::vector<PassSpec> parse_schedule(const std::string& text);
std::string format_schedule(std::span<const PassSpec> schedule);

struct SamplerConfig {
    int k = 13;         // anchor cameras (grid rows)
    int k_prime = 128;  // dense novel views per timestep
    int n = 8;          // grid-mode window / target count
    int m = 9;          // grid-mode conditioning count, n + 1
    int bullet_n = 13;
    int bullet_m = 3;
    std::vector<PassSpec> schedule{{PassKind::multiview, 25}, {PassKind::temporal, 16}, {PassKind::multiview, 8}};
    diffusion::GuidanceConfig guidance;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
};

/// j, j+1, ..., j+n-1 modulo size.
std::vector<int> window_indices(int start, int n, int size);

/// Per-pixel, per-channel median; even counts take the lower middle element.
Image pixel_median(std::span<const Image> images);

/// The sampler's input set: the original video frames (provenance input, one
/// per grid column, in time order) optionally followed by pseudo-inputs
/// (provenance generated) from the stationary bootstrap.
struct InputSet {
    std::vector<Frame> frames;

    std::vector<int> video_indices() const;  // frames with provenance input
    std::vector<Camera> cameras() const;
};

/// Optional per-cell record of the window outputs fused by a pass.
struct PassTrace {
    int rows = 0;
    int cols = 0;
    std::vector<std::vector<Image>> candidates;  // row-major

    const std::vector<Image>& at(int row, int col) const { return candidates.at(row * cols + col); }
};

/// Empty grid for the plan: rows = cameras of the anchor frames, columns = the
/// video times; input-coincident cells pinned.
ViewGrid make_grid(const InputSet& inputs, const trajectory::TrajectoryPlan& plan);

/// Overwrite every cell whose (camera, time) matches an original video frame.
void pin_inputs(ViewGrid& grid, const InputSet& inputs);

ViewGrid multiview_pass(const ViewGrid& grid, const InputSet& inputs, const trajectory::TrajectoryPlan& plan,
                        const diffusion::Denoiser& denoiser, const SamplerConfig& cfg, int level, int pass_index = 0,
                        PassTrace* trace = nullptr);

ViewGrid temporal_pass(const ViewGrid& grid, const InputSet& inputs, const trajectory::TrajectoryPlan& plan,
                       const diffusion::Denoiser& denoiser, const SamplerConfig& cfg, int level, int pass_index = 0,
                       PassTrace* trace = nullptr);

/// Runs cfg.schedule in order from an empty grid.
ViewGrid alternate_sample(const InputSet& inputs, const trajectory::TrajectoryPlan& plan,
                          const diffusion::Denoiser& denoiser, const SamplerConfig& cfg);

/// Generates one view per path camera at t = 0 in bullet-time mode,
/// conditioned on the first input frame, and appends them as generated
/// pseudo-inputs. Throws Errc::invalid_argument for a moving camera.
InputSet stationary_bootstrap(const InputSet& inputs, std::span<const Camera> path,
                              const diffusion::Denoiser& denoiser, const SamplerConfig& cfg, double scene_diagonal);

/// Plan over the pseudo-inputs appended by stationary_bootstrap.
trajectory::TrajectoryPlan bootstrap_plan(const InputSet& augmented, int path_count,
                                          std::vector<Camera> novel_cameras = {});

struct BulletTimeOptions {
    bool times_known = true;  // false: bullet frame gets time 0, the other inputs 1
};

/// Indices of the m anchors nearest to `point` (camera-centre distance,
/// ties to the lowest index), nearest first.
std::vector<int> nearest_anchors(std::span<const Camera> anchors, const Vec3& point, int m);

/// All views_cameras rendered at the time of inputs[target_index]. The first
/// min(N, count) cameras chosen by FPS are generated together as anchors; the
/// rest go in batches of N (index order), each conditioned on its M nearest
/// anchors. Output order follows view_cameras.
std::vector<Image> bullet_time(std::span<const View> inputs, int target_index, std::span<const Camera> view_cameras,
                               const diffusion::Denoiser& denoiser, const SamplerConfig& cfg,
                               const BulletTimeOptions& options = {});

/// Per column, novel cameras in batches of N conditioned on the M nearest grid
/// views at that time. Returns a grid with one row per novel camera.
ViewGrid dense_views(const ViewGrid& grid, std::span<const Camera> novel_cameras, const diffusion::Denoiser& denoiser,
                     const SamplerConfig& cfg);

}  // namespace mvgrid::gridsampler
