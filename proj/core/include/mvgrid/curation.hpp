#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mvgrid/image.hpp"

namespace mvgrid::curation {

inline constexpr int kCornerPatch = 10;
inline constexpr double kStaticThreshold = 0.05;

/// Per corner: mean over consecutive frame pairs of the RMS difference of the
/// 10x10 patch flush with that corner. Order: top-left, top-right,
/// bottom-left, bottom-right.
std::vector<double> corner_scores(std::span<const Image> video, int patch = kCornerPatch);

/// True iff every corner score is below the threshold.
bool static_view_filter(std::span<const Image> video, double threshold = kStaticThreshold, int patch = kCornerPatch);

struct MixtureSource {
    std::string name;
    double weight = 1.0;
};

struct MixtureSpec {
    std::vector<MixtureSource> sources;
    double single_image_prob = 0.01;

    /// The training mixture: nine sources, total weight 16.
    static MixtureSpec standard();
    void validate() const;
};

struct BatchDescriptor {
    std::string source;
    bool degenerate_single_image = false;
};

/// Stateful sampler; draws are deterministic given the seed.
class MixtureSampler {
public:
    MixtureSampler(MixtureSpec spec, std::uint64_t seed);
    BatchDescriptor next();
    const MixtureSpec& spec() const { return spec_; }

private:
    MixtureSpec spec_;
    std::mt19937_64 rng_;
    std::discrete_distribution<int> source_;
    std::bernoulli_distribution degenerate_;
};

/// Single draw from a fresh sampler seeded with `seed`.
BatchDescriptor mixture_sample(const MixtureSpec& spec, std::uint64_t seed);

}  // namespace mvgrid::curation
