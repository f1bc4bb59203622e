#include "mvgrid/curation.hpp"

#include <algorithm>
#include <cmath>

#include "mvgrid/error.hpp"

namespace mvgrid::curation {

std::vector<double> corner_scores(std::span<const Image> video, int patch) {
    require(video.size() >= 2, Errc::invalid_argument, "static filter: need at least two frames");
    const int w = video.front().width;
    const int h = video.front().height;
    require(w >= patch && h >= patch, Errc::invalid_argument, "static filter: frame smaller than the corner patch");
    for (const Image& f : video) require_same_shape(f, video.front(), "static filter");

    const int xs[4] = {0, w - patch, 0, w - patch};
    const int ys[4] = {0, 0, h - patch, h - patch};
    const double count = static_cast<double>(patch) * patch * Image::channels;
    std::vector<double> scores(4, 0.0);
    for (int corner = 0; corner < 4; ++corner) {
        double total = 0.0;
        for (std::size_t f = 1; f < video.size(); ++f) {
            double sq = 0.0;
            for (int y = ys[corner]; y < ys[corner] + patch; ++y)
                for (int x = xs[corner]; x < xs[corner] + patch; ++x)
                    for (int c = 0; c < Image::channels; ++c) {
                        const double d = video[f].at(x, y, c) - video[f - 1].at(x, y, c);
                        sq += d * d;
                    }
            total += std::sqrt(sq / count);
        }
        scores[corner] = total / static_cast<double>(video.size() - 1);
    }
    return scores;
}

bool static_view_filter(std::span<const Image> video, double threshold, int patch) {
    const std::vector<double> scores = corner_scores(video, patch);
    return *std::max_element(scores.begin(), scores.end()) < threshold;
}

MixtureSpec MixtureSpec::standard() {
    return MixtureSpec{{{"objaverse", 2.5},
                        {"kubric", 2.5},
                        {"re10k", 1.0},
                        {"mvimgnet", 1.0},
                        {"co3d", 1.0},
                        {"mq4k", 1.0},
                        {"static_view_video", 5.0},
                        {"augmented_co3d", 1.0},
                        {"augmented_video", 1.0}},
                       0.01};
}

void MixtureSpec::validate() const {
    require(!sources.empty(), Errc::invalid_argument, "mixture: no sources");
    for (const MixtureSource& s : sources)
        require(s.weight > 0.0 && std::isfinite(s.weight), Errc::invalid_argument,
                "mixture: weight of '" + s.name + "' must be positive");
    require(single_image_prob >= 0.0 && single_image_prob <= 1.0, Errc::invalid_argument,
            "mixture: single_image_prob must lie in [0,1]");
}

namespace {

std::discrete_distribution<int> make_source_distribution(const MixtureSpec& spec) {
    spec.validate();
    std::vector<double> weights;
    for (const MixtureSource& s : spec.sources) weights.push_back(s.weight);
    return std::discrete_distribution<int>(weights.begin(), weights.end());
}

}  // namespace

MixtureSampler::MixtureSampler(MixtureSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)),
      rng_(seed),
      source_(make_source_distribution(spec_)),
      degenerate_(spec_.single_image_prob) {}

BatchDescriptor MixtureSampler::next() {
    BatchDescriptor d;
    d.source = spec_.sources[source_(rng_)].name;
    d.degenerate_single_image = degenerate_(rng_);
    return d;
}

BatchDescriptor mixture_sample(const MixtureSpec& spec, std::uint64_t seed) {
    return MixtureSampler(spec, seed).next();
}

}  // namespace mvgrid::curation
