#pragma once

#include <cstdint>
#include <vector>

#include "mvgrid/diffusion.hpp"
#include "mvgrid/toyworld.hpp"

namespace mvgrid::diffusion {

/// Realism knobs for the oracle. With bias == 0 and jitter == 0 the oracle is
/// exact: its clean-image prediction is the ground-truth render.
struct CorruptionSpec {
    double bias = 0.0;    // RMS amplitude of the per-generation smooth colour bias
    double jitter = 0.0;  // maximum |time offset| hallucinated per generation
    std::uint64_t seed = 0;
    int hypotheses = 9;  // time-offset grid size used when jitter > 0

    bool exact() const { return bias == 0.0 && jitter == 0.0; }
    void validate() const;
};

/// Denoiser backed by the analytic toy world.
///
/// Clean-image target per conditioning variant: full conditioning renders the
/// target camera at the target time; dropped times render at the first
/// conditioning view's time; dropped images give the scene's mean colour.
///
/// When corrupted, each generation (LatentBatch::stream_key) draws a time
/// offset and a smooth bias shared by all its targets, and the oracle returns
/// the exact posterior mean of the clean image given z under that corrupted
/// prior: time offsets on a grid over [-jitter, jitter] with a Gaussian prior
/// around the drawn offset, bias coefficients Gaussian around the drawn bias.
/// The prediction therefore follows the noisy state at low noise levels, as a
/// trained model does.
class OracleDenoiser final : public Denoiser {
public:
    OracleDenoiser(toyworld::SceneSpec scene, CorruptionSpec corruption = {}, toyworld::RenderOptions render = {});

    std::vector<Image> predict(const LatentBatch& batch, const ConditioningSet& cond) const override;

    const toyworld::SceneSpec& scene() const { return scene_; }
    const CorruptionSpec& corruption() const { return corruption_; }

    /// Ground truth used by the oracle (cached).
    Image ground_truth(const Camera& camera, double time) const;

private:
    Image cached_render(const Camera& camera, double time) const;

    toyworld::SceneSpec scene_;
    CorruptionSpec corruption_;
    toyworld::RenderOptions render_;
    std::uint64_t instance_id_;
};

/// Returns the epsilon consistent with fixed clean targets (by batch index),
/// regardless of conditioning.
class FixedTargetDenoiser final : public Denoiser {
public:
    explicit FixedTargetDenoiser(std::vector<Image> x0) : x0_(std::move(x0)) {}
    std::vector<Image> predict(const LatentBatch& batch, const ConditioningSet& cond) const override;

private:
    std::vector<Image> x0_;
};

/// Orthonormal (over pixels) smooth basis {1, u, v} for a width x height image.
std::vector<std::vector<double>> smooth_basis(int width, int height);

}  // namespace mvgrid::diffusion
