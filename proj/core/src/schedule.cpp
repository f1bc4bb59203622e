#include <cmath>

#include "mvgrid/diffusion.hpp"

namespace mvgrid::diffusion {

double NoiseSchedule::level_alpha_bar(int level) const {
    require(level >= 0 && level <= ddim_steps, Errc::out_of_range,
            "noise level " + std::to_string(level) + " outside [0," + std::to_string(ddim_steps) + "]");
    if (level == 0) return 1.0;
    return alpha_bar[substep_indices[ddim_steps - level]];
}

NoiseSchedule make_schedule(int train_steps, int ddim_steps, double beta_start, double beta_end) {
    require(train_steps >= 1, Errc::invalid_argument, "make_schedule: train_steps must be positive");
    require(ddim_steps >= 1, Errc::invalid_argument, "make_schedule: ddim_steps must be positive");
    require(ddim_steps <= train_steps, Errc::invalid_argument, "make_schedule: ddim_steps exceeds train_steps");
    require(beta_start > 0.0 && beta_end >= beta_start && beta_end < 1.0, Errc::invalid_argument,
            "make_schedule: invalid beta range");

    NoiseSchedule s;
    s.train_steps = train_steps;
    s.ddim_steps = ddim_steps;
    s.alpha_bar.resize(train_steps);
    double prod = 1.0;
    for (int t = 0; t < train_steps; ++t) {
        const double beta =
            train_steps == 1 ? beta_start
                             : beta_start + (beta_end - beta_start) * static_cast<double>(t) / (train_steps - 1);
        prod *= 1.0 - beta;
        s.alpha_bar[t] = prod;
    }
    const int stride = train_steps / ddim_steps;
    s.substep_indices.resize(ddim_steps);
    for (int k = 0; k < ddim_steps; ++k) s.substep_indices[k] = (ddim_steps - 1 - k) * stride;
    return s;
}

void GuidanceConfig::validate() const {
    require(s_image >= 0.0 && s_time >= 0.0, Errc::invalid_argument, "guidance scales must be non-negative");
}

GuidanceCoefficients guidance_coefficients(const GuidanceConfig& g) {
    return {1.0 - g.s_image, g.s_image - g.s_time, g.s_time};
}

std::vector<double> cfg_epsilon(std::span<const double> eps_uncond, std::span<const double> eps_image,
                                std::span<const double> eps_full, const GuidanceConfig& g) {
    require(eps_uncond.size() == eps_image.size() && eps_image.size() == eps_full.size(), Errc::shape_mismatch,
            "cfg_epsilon: inputs differ in shape");
    const auto c = guidance_coefficients(g);
    std::vector<double> out(eps_full.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = c.uncond * eps_uncond[i] + c.image * eps_image[i] + c.full * eps_full[i];
    }
    return out;
}

}  // namespace mvgrid::diffusion
