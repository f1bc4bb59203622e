#include <cmath>
#include <random>

#include "mvgrid/diffusion.hpp"

namespace mvgrid::diffusion {

void LatentBatch::validate() const {
    require(!targets.empty(), Errc::invalid_argument, "latent batch is empty");
    require(target_cameras.size() == targets.size() && target_times.size() == targets.size(), Errc::shape_mismatch,
            "latent batch: targets, cameras and times differ in count");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        require_same_shape(targets[i], targets.front(), "latent batch");
        require(targets[i].width == target_cameras[i].width && targets[i].height == target_cameras[i].height,
                Errc::shape_mismatch, "latent batch: target size differs from its camera");
    }
}

void ConditioningSet::validate() const {
    require(images_present || !times_present, Errc::invalid_argument,
            "conditioning: times cannot be present without images");
}

ConditioningSet ConditioningSet::with_times_dropped() const {
    ConditioningSet c = *this;
    c.times_present = false;
    return c;
}

ConditioningSet ConditioningSet::unconditional() const {
    ConditioningSet c = *this;
    c.images_present = false;
    c.times_present = false;
    return c;
}

LatentBatch ddim_step(const LatentBatch& batch, std::span<const Image> eps, const NoiseSchedule& schedule) {
    require(batch.level > 0, Errc::out_of_range, "ddim_step: batch is already at the final level");
    require(eps.size() == batch.targets.size(), Errc::shape_mismatch, "ddim_step: epsilon count mismatch");
    const double ab_from = schedule.level_alpha_bar(batch.level);
    const double ab_to = schedule.level_alpha_bar(batch.level - 1);
    LatentBatch next = batch;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        require_same_shape(next.targets[i], eps[i], "ddim_step");
        ddim_update<double>(next.targets[i].values(), eps[i].values(), ab_from, ab_to);
    }
    next.level = batch.level - 1;
    next.alpha_bar = ab_to;
    return next;
}

std::vector<Image> gaussian_noise(int count, int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Image> out;
    out.reserve(count);
    for (int n = 0; n < count; ++n) {
        Image img(width, height);
        for (double& v : img.data) v = normal(rng);
        out.push_back(std::move(img));
    }
    return out;
}

Image consistent_epsilon(const Image& z, const Image& x0, double alpha_bar) {
    require_same_shape(z, x0, "consistent_epsilon");
    require(alpha_bar < 1.0, Errc::out_of_range, "consistent_epsilon: undefined at alpha_bar = 1");
    const double sa = std::sqrt(alpha_bar);
    const double sn = std::sqrt(1.0 - alpha_bar);
    Image eps(z.width, z.height);
    for (std::size_t i = 0; i < z.data.size(); ++i) eps.data[i] = (z.data[i] - sa * x0.data[i]) / sn;
    return eps;
}

std::vector<Image> run_ddim(const Denoiser& denoiser, const ConditioningSet& cond, LatentBatch batch,
                            const NoiseSchedule& schedule, const GuidanceConfig& guidance) {
    batch.validate();
    cond.validate();
    guidance.validate();
    const DenoiserSpec spec = denoiser.spec();
    require(spec.max_targets == 0 || batch.size() <= spec.max_targets, Errc::invalid_argument,
            "sample: more targets than the denoiser supports");
    require(spec.max_conditioning == 0 || static_cast<int>(cond.views.size()) <= spec.max_conditioning,
            Errc::invalid_argument, "sample: more conditioning views than the denoiser supports");

    const GuidanceCoefficients coef = guidance_coefficients(guidance);
    const ConditioningSet image_only = cond.with_times_dropped();
    const ConditioningSet uncond = cond.unconditional();

    while (batch.level > 0) {
        batch.alpha_bar = schedule.level_alpha_bar(batch.level);
        std::vector<Image> eps(batch.targets.size());
        for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = Image(batch.targets[i].width, batch.targets[i].height);

        // Zero-weight variants contribute exactly nothing and are not evaluated.
        auto accumulate = [&](double weight, const ConditioningSet& variant) {
            if (weight == 0.0) return;
            const std::vector<Image> pred = denoiser.predict(batch, variant);
            require(pred.size() == eps.size(), Errc::shape_mismatch, "denoiser returned the wrong number of images");
            for (std::size_t i = 0; i < eps.size(); ++i) {
                require_same_shape(pred[i], eps[i], "denoiser output");
                for (std::size_t k = 0; k < eps[i].data.size(); ++k) eps[i].data[k] += weight * pred[i].data[k];
            }
        };
        accumulate(coef.uncond, uncond);
        accumulate(coef.image, image_only);
        accumulate(coef.full, cond);
        batch = ddim_step(batch, eps, schedule);
    }
    return std::move(batch.targets);
}

std::vector<Image> sample(const Denoiser& denoiser, const ConditioningSet& cond, const SampleRequest& request,
                          const NoiseSchedule& schedule, const GuidanceConfig& guidance) {
    require(!request.cameras.empty(), Errc::invalid_argument, "sample: no target cameras");
    require(request.cameras.size() == request.times.size(), Errc::shape_mismatch,
            "sample: target cameras and times differ in count");
    const int n = static_cast<int>(request.cameras.size());
    const int w = request.cameras.front().width;
    const int h = request.cameras.front().height;

    LatentBatch batch;
    batch.target_cameras = request.cameras;
    batch.target_times = request.times;
    batch.stream_key = request.seed;
    std::vector<Image> noise = gaussian_noise(n, w, h, request.seed);

    if (request.init.kind == SampleInit::Kind::pure_noise) {
        batch.level = schedule.ddim_steps;
        batch.targets = std::move(noise);
    } else {
        const int level = request.init.level;
        require(level >= 1 && level <= schedule.ddim_steps, Errc::out_of_range,
                "sample: init noise level must be in [1," + std::to_string(schedule.ddim_steps) + "]");
        require(static_cast<int>(request.init.images.size()) == n, Errc::shape_mismatch,
                "sample: init image count differs from target count");
        const double ab = schedule.level_alpha_bar(level);
        const double sa = std::sqrt(ab);
        const double sn = std::sqrt(1.0 - ab);
        batch.level = level;
        batch.targets = std::move(noise);
        for (int i = 0; i < n; ++i) {
            const Image& x = request.init.images[i];
            require_same_shape(x, batch.targets[i], "sample init");
            for (std::size_t k = 0; k < x.data.size(); ++k) {
                batch.targets[i].data[k] = sa * x.data[k] + sn * batch.targets[i].data[k];
            }
        }
    }
    batch.alpha_bar = schedule.level_alpha_bar(batch.level);
    return run_ddim(denoiser, cond, std::move(batch), schedule, guidance);
}

}  // namespace mvgrid::diffusion
