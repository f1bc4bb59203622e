#include <algorithm>
#include <numeric>

#include "mvgrid/error.hpp"
#include "mvgrid/grid_sampler.hpp"
#include "mvgrid/parallel.hpp"
#include "mvgrid/rng.hpp"

namespace mvgrid::gridsampler {

namespace {

constexpr std::uint64_t kBulletTag = 0xB0111E7ull;
constexpr std::uint64_t kDenseTag = 0xDE45Eull;

Vec3 centroid(std::span<const Camera> cameras, std::span<const int> indices) {
    Vec3 sum = Vec3::Zero();
    for (int i : indices) sum += cameras[i].center();
    return sum / static_cast<double>(indices.size());
}

std::vector<Image> generate(const diffusion::Denoiser& denoiser, const diffusion::ConditioningSet& cond,
                            std::vector<Camera> cameras, double time, std::uint64_t seed,
                            const diffusion::GuidanceConfig& guidance) {
    static const diffusion::NoiseSchedule schedule = diffusion::make_schedule();
    diffusion::SampleRequest request;
    request.times.assign(cameras.size(), time);
    request.cameras = std::move(cameras);
    request.seed = seed;
    return diffusion::sample(denoiser, cond, request, schedule, guidance);
}

}  // namespace

std::vector<int> nearest_anchors(std::span<const Camera> anchors, const Vec3& point, int m) {
    require(m >= 1, Errc::invalid_argument, "nearest_anchors: m must be >= 1");
    require(static_cast<int>(anchors.size()) >= m, Errc::invalid_argument, "nearest_anchors: fewer than m anchors");
    std::vector<int> order(anchors.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> dist(anchors.size());
    for (std::size_t i = 0; i < anchors.size(); ++i) dist[i] = (anchors[i].center() - point).norm();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dist[a] < dist[b]; });
    order.resize(m);
    return order;
}

std::vector<Image> bullet_time(std::span<const View> inputs, int target_index, std::span<const Camera> view_cameras,
                               const diffusion::Denoiser& denoiser, const SamplerConfig& cfg,
                               const BulletTimeOptions& options) {
    cfg.validate();
    require(!inputs.empty() && static_cast<int>(inputs.size()) <= cfg.bullet_m, Errc::invalid_argument,
            "bullet_time: need between 1 and M input views");
    require(target_index >= 0 && target_index < static_cast<int>(inputs.size()), Errc::out_of_range,
            "bullet_time: target index out of range");
    require(!view_cameras.empty(), Errc::invalid_argument, "bullet_time: no view cameras");

    // The bullet frame leads the conditioning set.
    diffusion::ConditioningSet cond;
    cond.views.push_back(inputs[target_index]);
    for (int i = 0; i < static_cast<int>(inputs.size()); ++i)
        if (i != target_index) cond.views.push_back(inputs[i]);
    if (!options.times_known)
        for (std::size_t i = 0; i < cond.views.size(); ++i) cond.views[i].time = i == 0 ? 0.0 : 1.0;
    const double time = cond.views.front().time;

    const int total = static_cast<int>(view_cameras.size());
    if (total <= cfg.bullet_n) {
        return generate(denoiser, cond, {view_cameras.begin(), view_cameras.end()}, time,
                        derive_seed({cfg.seed, kBulletTag, 0}), cfg.guidance);
    }
    require(cfg.bullet_n >= cfg.bullet_m, Errc::invalid_argument, "bullet_time: fewer than M anchors available");

    const std::vector<int> anchor_idx = trajectory::farthest_point_sample(view_cameras, cfg.bullet_n);
    std::vector<Camera> anchor_cams;
    for (int a : anchor_idx) anchor_cams.push_back(view_cameras[a]);
    std::vector<Image> anchor_images =
        generate(denoiser, cond, anchor_cams, time, derive_seed({cfg.seed, kBulletTag, 0}), cfg.guidance);

    std::vector<Image> out(total);
    std::vector<bool> is_anchor(total, false);
    for (std::size_t i = 0; i < anchor_idx.size(); ++i) {
        out[anchor_idx[i]] = anchor_images[i];
        is_anchor[anchor_idx[i]] = true;
    }
    std::vector<int> rest;
    for (int i = 0; i < total; ++i)
        if (!is_anchor[i]) rest.push_back(i);

    const int batches = (static_cast<int>(rest.size()) + cfg.bullet_n - 1) / cfg.bullet_n;
    parallel_for(batches, cfg.threads, [&](int b) {
        const int lo = b * cfg.bullet_n;
        const int hi = std::min(static_cast<int>(rest.size()), lo + cfg.bullet_n);
        const std::span<const int> members(rest.data() + lo, hi - lo);
        diffusion::ConditioningSet batch_cond;
        for (int a : nearest_anchors(anchor_cams, centroid(view_cameras, members), cfg.bullet_m))
            batch_cond.views.push_back(View{anchor_images[a], anchor_cams[a], time});
        std::vector<Camera> cams;
        for (int i : members) cams.push_back(view_cameras[i]);
        std::vector<Image> images = generate(denoiser, batch_cond, std::move(cams), time,
                                             derive_seed({cfg.seed, kBulletTag, static_cast<std::uint64_t>(b + 1)}),
                                             cfg.guidance);
        for (std::size_t i = 0; i < members.size(); ++i) out[members[i]] = std::move(images[i]);
    });
    return out;
}

ViewGrid dense_views(const ViewGrid& grid, std::span<const Camera> novel_cameras, const diffusion::Denoiser& denoiser,
                     const SamplerConfig& cfg) {
    cfg.validate();
    require(grid.complete(), Errc::missing_cell, "dense_views: grid is incomplete");
    ViewGrid out({novel_cameras.begin(), novel_cameras.end()}, grid.raw_times(), grid.times(), grid.width(),
                 grid.height());
    const int total = static_cast<int>(novel_cameras.size());
    if (total == 0) return out;
    const int m = std::min(cfg.m, grid.rows());
    const int batches = (total + cfg.n - 1) / cfg.n;

    std::vector<std::vector<Image>> columns(grid.cols(), std::vector<Image>(total));
    parallel_for(grid.cols(), cfg.threads, [&](int c) {
        for (int b = 0; b < batches; ++b) {
            std::vector<int> members;
            for (int i = b * cfg.n; i < std::min(total, (b + 1) * cfg.n); ++i) members.push_back(i);
            diffusion::ConditioningSet cond;
            for (int r : nearest_anchors(grid.cameras(), centroid(novel_cameras, members), m))
                cond.views.push_back(grid.view(r, c));
            std::vector<Camera> cams;
            for (int i : members) cams.push_back(novel_cameras[i]);
            std::vector<Image> images = generate(
                denoiser, cond, std::move(cams), grid.time(c),
                derive_seed({cfg.seed, kDenseTag, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(b)}),
                cfg.guidance);
            for (std::size_t i = 0; i < members.size(); ++i) columns[c][members[i]] = std::move(images[i]);
        }
    });
    for (int c = 0; c < grid.cols(); ++c)
        for (int i = 0; i < total; ++i) out.set(i, c, std::move(columns[c][i]), FillState::generated);
    return out;
}

}  // namespace mvgrid::gridsampler
