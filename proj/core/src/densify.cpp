#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mvgrid/error.hpp"
#include "mvgrid/optimize.hpp"

namespace mvgrid::recon4d {

void DensifyStats::reset(int n) {
    grad_sum.assign(n, 0.0);
    count.assign(n, 0);
}

DensifyResult densify_prune(const GaussianCloud& cloud, const DensifyStats& stats, const ReconConfig& cfg,
                            double scene_diagonal, std::uint64_t seed) {
    const int n = cloud.size();
    require(static_cast<int>(stats.grad_sum.size()) == n && static_cast<int>(stats.count.size()) == n,
            Errc::shape_mismatch, "densify: statistics do not match the cloud");
    std::vector<double> mean(n, 0.0);
    std::vector<int> candidates;
    for (int i = 0; i < n; ++i) {
        if (stats.count[i] > 0) mean[i] = stats.grad_sum[i] / stats.count[i];
        if (mean[i] > cfg.densify_grad_threshold) candidates.push_back(i);
    }
    // Largest gradients first when the size cap binds.
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) { return mean[a] > mean[b]; });
    const int budget = std::max(0, cfg.max_gaussians - n);
    if (static_cast<int>(candidates.size()) > budget) candidates.resize(budget);
    std::vector<char> action(n, 0);  // 1 clone, 2 split
    const double clone_limit = cfg.percent_dense * scene_diagonal;
    for (int i : candidates) action[i] = cloud.scale(i) <= clone_limit ? 1 : 2;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DensifyResult out;
    GaussianCloud grown;
    std::vector<int> origin;
    for (int i = 0; i < n; ++i) {
        if (action[i] == 2) {
            ++out.split;
            const double child_log_scale = cloud.log_scales[i] - std::log(cfg.split_factor);
            for (int c = 0; c < 2; ++c) {
                const Vec3 jitter(normal(rng), normal(rng), normal(rng));
                grown.push_back(cloud.positions[i] + cloud.scale(i) * jitter, child_log_scale,
                                cloud.opacity_logits[i], cloud.colors[i]);
                origin.push_back(-1);
            }
            continue;
        }
        grown.push_back(cloud.positions[i], cloud.log_scales[i], cloud.opacity_logits[i], cloud.colors[i]);
        origin.push_back(i);
        if (action[i] == 1) {
            ++out.cloned;
            grown.push_back(cloud.positions[i], cloud.log_scales[i], cloud.opacity_logits[i], cloud.colors[i]);
            origin.push_back(-1);
        }
    }
    for (int i = 0; i < grown.size(); ++i) {
        if (grown.opacity(i) < cfg.prune_opacity) {
            ++out.pruned;
            continue;
        }
        out.cloud.push_back(grown.positions[i], grown.log_scales[i], grown.opacity_logits[i], grown.colors[i]);
        out.origin.push_back(origin[i]);
    }
    return out;
}

}  // namespace mvgrid::recon4d
