#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mvgrid/camera.hpp"
#include "mvgrid/error.hpp"
#include "mvgrid/image.hpp"
#include "mvgrid/view_grid.hpp"

namespace mvgrid::diffusion {

/// Linear-beta DDPM schedule with an evenly strided DDIM sub-chain.
///
/// Noise levels count remaining DDIM steps: level k in [1, ddim_steps] sits at
/// training index substep_indices[ddim_steps - k]; level 0 is the clean
/// terminal state with alpha_bar = 1. Starting from level k, exactly k
/// updates reach level 0.
struct NoiseSchedule {
    int train_steps = 0;
    std::vector<double> alpha_bar;
    int ddim_steps = 0;
    std::vector<int> substep_indices;  // strictly decreasing

    double level_alpha_bar(int level) const;
};

NoiseSchedule make_schedule(int train_steps = 1000, int ddim_steps = 25, double beta_start = 1e-4,
                            double beta_end = 2e-2);

struct GuidanceConfig {
    double s_image = 3.0;
    double s_time = 4.5;

    void validate() const;
};

/// Weights of (uncond, image-only, full) predictions in the two-scale guided
/// combination; they always sum to one.
struct GuidanceCoefficients {
    double uncond;
    double image;
    double full;
};

GuidanceCoefficients guidance_coefficients(const GuidanceConfig& g);

/// eps_uncond + s_image (eps_image - eps_uncond) + s_time (eps_full - eps_image),
/// evaluated in coefficient form so the unit-scale and zero-scale identities
/// hold bit-exactly.
std::vector<double> cfg_epsilon(std::span<const double> eps_uncond, std::span<const double> eps_image,
                                std::span<const double> eps_full, const GuidanceConfig& g);

inline constexpr double kClipLow = -0.1;
inline constexpr double kClipHigh = 1.1;

/// Deterministic (eta = 0) DDIM update in place, from alpha_bar `ab_from` to
/// `ab_to`. The clean estimate is clipped to [-0.1, 1.1]. Equal levels leave z
/// untouched.
template <typename T>
void ddim_update(std::span<T> z, std::span<const T> eps, double ab_from, double ab_to) {
    require(z.size() == eps.size(), Errc::shape_mismatch, "ddim_update: latent and epsilon sizes differ");
    if (ab_from == ab_to) return;
    const T sa = static_cast<T>(std::sqrt(ab_from));
    const T sn = static_cast<T>(std::sqrt(1.0 - ab_from));
    const T sa_to = static_cast<T>(std::sqrt(ab_to));
    const T sn_to = static_cast<T>(std::sqrt(std::max(0.0, 1.0 - ab_to)));
    for (std::size_t i = 0; i < z.size(); ++i) {
        T x0 = (z[i] - sn * eps[i]) / sa;
        x0 = std::clamp(x0, static_cast<T>(kClipLow), static_cast<T>(kClipHigh));
        z[i] = sa_to * x0 + sn_to * eps[i];
    }
}

/// Noisy target state at a given noise level.
struct LatentBatch {
    std::vector<Image> targets;  // z, pixel space
    std::vector<Camera> target_cameras;
    std::vector<double> target_times;
    int level = 0;
    double alpha_bar = 1.0;
    // Identifies the generation (window) this batch belongs to; denoisers
    // that model per-generation randomness key it on this value.
    std::uint64_t stream_key = 0;

    int size() const { return static_cast<int>(targets.size()); }
    void validate() const;
};

struct ConditioningSet {
    std::vector<View> views;
    bool images_present = true;
    bool times_present = true;

    void validate() const;
    ConditioningSet with_times_dropped() const;
    ConditioningSet unconditional() const;
};

/// Capacity of a denoiser: at most max_conditioning inputs (M) and
/// max_targets outputs (N) per call. Zero means unbounded.
struct DenoiserSpec {
    int max_conditioning = 0;
    int max_targets = 0;
};

/// The epsilon-prediction contract. Implementations must be deterministic
/// and reentrant (callable concurrently from several threads).
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual DenoiserSpec spec() const { return {}; }
    virtual std::vector<Image> predict(const LatentBatch& batch, const ConditioningSet& cond) const = 0;
};

/// One DDIM step of the whole batch with the given (already guided) epsilons.
/// Throws when called at level 0.
LatentBatch ddim_step(const LatentBatch& batch, std::span<const Image> eps, const NoiseSchedule& schedule);

struct SampleInit {
    enum class Kind { pure_noise, from_images };
    Kind kind = Kind::pure_noise;
    std::vector<Image> images;
    int level = 0;

    static SampleInit pure_noise() { return {}; }
    static SampleInit from(std::vector<Image> images, int level) {
        return {Kind::from_images, std::move(images), level};
    }
};

struct SampleRequest {
    std::vector<Camera> cameras;
    std::vector<double> times;
    SampleInit init;
    std::uint64_t seed = 0;
};

/// Guided DDIM sampling of N target views. pure_noise starts from z ~ N(0, I)
/// at the top level; from_images(x, k) noises x to level k with seeded noise
/// and runs the remaining k steps. Pure function of its inputs.
std::vector<Image> sample(const Denoiser& denoiser, const ConditioningSet& cond, const SampleRequest& request,
                          const NoiseSchedule& schedule, const GuidanceConfig& guidance);

/// Lower-level entry: run guided DDIM from an explicit noisy state.
std::vector<Image> run_ddim(const Denoiser& denoiser, const ConditioningSet& cond, LatentBatch batch,
                            const NoiseSchedule& schedule, const GuidanceConfig& guidance);

/// Seeded standard-normal images.
std::vector<Image> gaussian_noise(int count, int width, int height, std::uint64_t seed);

/// Epsilon consistent with a clean image x0 at alpha_bar.
Image consistent_epsilon(const Image& z, const Image& x0, double alpha_bar);

}  // namespace mvgrid::diffusion
