#include "mvgrid/grid_sampler.hpp"

#include <algorithm>
#include <sstream>

#include "mvgrid/error.hpp"
#include "mvgrid/parallel.hpp"
#include "mvgrid/rng.hpp"

namespace mvgrid::gridsampler {

using diffusion::ConditioningSet;
using diffusion::Denoiser;
using diffusion::SampleInit;
using diffusion::SampleRequest;

std::vector<PassSpec> parse_schedule(const std::string& text) {
    std::vector<PassSpec> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const auto colon = item.find(':');
        require(colon != std::string::npos, Errc::invalid_argument, "schedule entry '" + item + "' lacks ':'");
        const std::string kind = item.substr(0, colon);
        PassSpec pass;
        if (kind == "mv" || kind == "multiview") {
            pass.kind = PassKind::multiview;
        } else if (kind == "t" || kind == "temporal") {
            pass.kind = PassKind::temporal;
        } else {
            fail(Errc::invalid_argument, "unknown pass kind '" + kind + "'");
        }
        try {
            std::size_t used = 0;
            pass.level = std::stoi(item.substr(colon + 1), &used);
            require(used == item.size() - colon - 1, Errc::invalid_argument, "trailing characters");
        } catch (const std::logic_error&) {
            fail(Errc::invalid_argument, "bad noise level in schedule entry '" + item + "'");
        }
        out.push_back(pass);
    }
    require(!out.empty(), Errc::invalid_argument, "empty schedule");
    return out;
}

std::string format_schedule(std::span<const PassSpec> schedule) {
    std::string out;
    for (const PassSpec& p : schedule) {
        if (!out.empty()) out += ',';
        out += (p.kind == PassKind::multiview ? "mv:" : "t:") + std::to_string(p.level);
    }
    return out;
}

void SamplerConfig::validate() const {
    require(k >= 1 && k_prime >= 0, Errc::invalid_argument, "sampler: k >= 1 and k_prime >= 0 required");
    require(n >= 1 && m == n + 1, Errc::invalid_argument, "sampler: grid mode needs m == n + 1");
    require(bullet_n >= 1 && bullet_m >= 1, Errc::invalid_argument, "sampler: bullet-time sizes must be >= 1");
    require(!schedule.empty(), Errc::invalid_argument, "sampler: empty schedule");
    require(schedule.front().level == 25, Errc::invalid_argument, "sampler: the first pass must start from level 25");
    for (const PassSpec& p : schedule)
        require(p.level >= 1 && p.level <= 25, Errc::out_of_range, "sampler: noise levels must lie in [1,25]");
    require(threads >= 1, Errc::invalid_argument, "sampler: threads must be >= 1");
    guidance.validate();
}

std::vector<int> window_indices(int start, int n, int size) {
    require(size >= 1 && n >= 1, Errc::invalid_argument, "window: size and n must be >= 1");
    require(start >= 0 && start < size, Errc::out_of_range, "window: start outside [0, size)");
    std::vector<int> out(n);
    for (int i = 0; i < n; ++i) out[i] = (start + i) % size;
    return out;
}

Image pixel_median(std::span<const Image> images) {
    require(!images.empty(), Errc::invalid_argument, "pixel_median: no images");
    for (const Image& img : images) require_same_shape(img, images.front(), "pixel_median");
    if (images.size() == 1) return images.front();
    Image out(images.front().width, images.front().height);
    const std::size_t mid = (images.size() - 1) / 2;
    std::vector<double> buf(images.size());
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        for (std::size_t i = 0; i < images.size(); ++i) buf[i] = images[i].data[k];
        std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(mid), buf.end());
        out.data[k] = buf[mid];
    }
    return out;
}

std::vector<int> InputSet::video_indices() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < frames.size(); ++i)
        if (frames[i].provenance == FillState::input) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<Camera> InputSet::cameras() const {
    std::vector<Camera> out;
    out.reserve(frames.size());
    for (const Frame& f : frames) out.push_back(f.view.camera);
    return out;
}

ViewGrid make_grid(const InputSet& inputs, const trajectory::TrajectoryPlan& plan) {
    plan.validate(static_cast<int>(inputs.frames.size()));
    require(!plan.anchor_indices.empty(), Errc::invalid_argument, "grid: plan has no anchors");
    const std::vector<int> video = inputs.video_indices();
    require(!video.empty(), Errc::invalid_argument, "grid: input set has no video frames");
    std::vector<Camera> rows;
    for (int a : plan.anchor_indices) rows.push_back(inputs.frames[a].view.camera);
    std::vector<double> times;
    for (int v : video) times.push_back(inputs.frames[v].view.time);
    const Image& first = inputs.frames[video.front()].view.image;
    ViewGrid grid(std::move(rows), times, times, first.width, first.height);
    pin_inputs(grid, inputs);
    return grid;
}

void pin_inputs(ViewGrid& grid, const InputSet& inputs) {
    const std::vector<int> video = inputs.video_indices();
    require(static_cast<int>(video.size()) == grid.cols(), Errc::shape_mismatch,
            "pin_inputs: video length differs from grid columns");
    for (int c = 0; c < grid.cols(); ++c) {
        const View& v = inputs.frames[video[c]].view;
        for (int r = 0; r < grid.rows(); ++r)
            if (grid.camera(r) == v.camera) grid.set(r, c, v.image, FillState::input);
    }
}

namespace {

const diffusion::NoiseSchedule& schedule() {
    static const diffusion::NoiseSchedule s = diffusion::make_schedule();
    return s;
}

void check_capacity(const Denoiser& denoiser, int targets, int conditioning) {
    const diffusion::DenoiserSpec spec = denoiser.spec();
    require(spec.max_targets == 0 || targets <= spec.max_targets, Errc::invalid_argument,
            "denoiser cannot take this many targets");
    require(spec.max_conditioning == 0 || conditioning <= spec.max_conditioning, Errc::invalid_argument,
            "denoiser cannot take this many conditioning views");
}

struct AxisJob {
    // Cells along the axis element, in axis order: (row, col).
    std::vector<std::pair<int, int>> cells;
    // Conditioning view shared by every window (input frame at the target
    // time, or at the target camera).
    const View* shared;
    // Conditioning view per axis position.
    std::vector<const View*> per_position;
};

// One axis element: all windows, then the per-cell median.
std::vector<Image> run_axis(const ViewGrid& grid, const AxisJob& job, const Denoiser& denoiser,
                            const SamplerConfig& cfg, int level, int pass_index, int element,
                            std::vector<std::vector<Image>>* candidates_out) {
    const int size = static_cast<int>(job.cells.size());
    const int len = std::min(cfg.n, size);
    check_capacity(denoiser, len, len + 1);
    std::vector<std::vector<Image>> candidates(size);
    for (int start = 0; start < size; ++start) {
        const std::vector<int> window = window_indices(start, len, size);
        ConditioningSet cond;
        cond.views.push_back(*job.shared);
        SampleRequest request;
        std::vector<Image> init;
        for (int p : window) {
            cond.views.push_back(*job.per_position[p]);
            const auto [r, c] = job.cells[p];
            request.cameras.push_back(grid.camera(r));
            request.times.push_back(grid.time(c));
            if (level < 25) init.push_back(grid.image(r, c));
        }
        request.seed = derive_seed({cfg.seed, static_cast<std::uint64_t>(pass_index),
                                    static_cast<std::uint64_t>(element), static_cast<std::uint64_t>(start)});
        request.init = level < 25 ? SampleInit::from(std::move(init), level) : SampleInit::pure_noise();
        std::vector<Image> out = diffusion::sample(denoiser, cond, request, schedule(), cfg.guidance);
        for (int i = 0; i < len; ++i) candidates[window[i]].push_back(std::move(out[i]));
    }
    std::vector<Image> fused;
    fused.reserve(size);
    for (const auto& c : candidates) fused.push_back(pixel_median(c));
    if (candidates_out) *candidates_out = std::move(candidates);
    return fused;
}

ViewGrid run_pass(PassKind kind, const ViewGrid& grid, const InputSet& inputs,
                  const trajectory::TrajectoryPlan& plan, const Denoiser& denoiser, const SamplerConfig& cfg,
                  int level, int pass_index, PassTrace* trace) {
    cfg.validate();
    require(level >= 1 && level <= 25, Errc::out_of_range, "pass: noise level must lie in [1,25]");
    require(static_cast<int>(plan.anchor_indices.size()) == grid.rows(), Errc::shape_mismatch,
            "pass: plan anchors differ from grid rows");
    const std::vector<int> video = inputs.video_indices();
    require(static_cast<int>(video.size()) == grid.cols(), Errc::shape_mismatch,
            "pass: video length differs from grid columns");
    if (level < 25) require(grid.complete(), Errc::missing_cell, "pass: SDEdit initialisation needs a complete grid");

    const bool mv = kind == PassKind::multiview;
    const int elements = mv ? grid.cols() : grid.rows();
    std::vector<AxisJob> jobs(elements);
    for (int e = 0; e < elements; ++e) {
        AxisJob& job = jobs[e];
        if (mv) {
            job.shared = &inputs.frames[video[e]].view;
            for (int r = 0; r < grid.rows(); ++r) {
                job.cells.emplace_back(r, e);
                job.per_position.push_back(&inputs.frames[plan.anchor_indices[r]].view);
            }
        } else {
            job.shared = &inputs.frames[plan.anchor_indices[e]].view;
            for (int c = 0; c < grid.cols(); ++c) {
                job.cells.emplace_back(e, c);
                job.per_position.push_back(&inputs.frames[video[c]].view);
            }
        }
    }

    std::vector<std::vector<Image>> results(elements);
    std::vector<std::vector<std::vector<Image>>> traced(trace ? elements : 0);
    parallel_for(elements, cfg.threads, [&](int e) {
        results[e] = run_axis(grid, jobs[e], denoiser, cfg, level, pass_index, e, trace ? &traced[e] : nullptr);
    });

    ViewGrid out = grid;
    if (trace) {
        trace->rows = grid.rows();
        trace->cols = grid.cols();
        trace->candidates.assign(static_cast<std::size_t>(grid.rows()) * grid.cols(), {});
    }
    for (int e = 0; e < elements; ++e) {
        for (std::size_t p = 0; p < jobs[e].cells.size(); ++p) {
            const auto [r, c] = jobs[e].cells[p];
            out.set(r, c, std::move(results[e][p]), FillState::generated);
            if (trace) trace->candidates[r * grid.cols() + c] = std::move(traced[e][p]);
        }
    }
    pin_inputs(out, inputs);
    return out;
}

}  // namespace

ViewGrid multiview_pass(const ViewGrid& grid, const InputSet& inputs, const trajectory::TrajectoryPlan& plan,
                        const Denoiser& denoiser, const SamplerConfig& cfg, int level, int pass_index,
                        PassTrace* trace) {
    return run_pass(PassKind::multiview, grid, inputs, plan, denoiser, cfg, level, pass_index, trace);
}

ViewGrid temporal_pass(const ViewGrid& grid, const InputSet& inputs, const trajectory::TrajectoryPlan& plan,
                       const Denoiser& denoiser, const SamplerConfig& cfg, int level, int pass_index,
                       PassTrace* trace) {
    return run_pass(PassKind::temporal, grid, inputs, plan, denoiser, cfg, level, pass_index, trace);
}

ViewGrid alternate_sample(const InputSet& inputs, const trajectory::TrajectoryPlan& plan, const Denoiser& denoiser,
                          const SamplerConfig& cfg) {
    cfg.validate();
    ViewGrid grid = make_grid(inputs, plan);
    for (std::size_t p = 0; p < cfg.schedule.size(); ++p) {
        const PassSpec& pass = cfg.schedule[p];
        grid = run_pass(pass.kind, grid, inputs, plan, denoiser, cfg, pass.level, static_cast<int>(p), nullptr);
    }
    return grid;
}

InputSet stationary_bootstrap(const InputSet& inputs, std::span<const Camera> path, const Denoiser& denoiser,
                              const SamplerConfig& cfg, double scene_diagonal) {
    const std::vector<int> video = inputs.video_indices();
    require(!video.empty(), Errc::invalid_argument, "bootstrap: input set has no video frames");
    require(!path.empty(), Errc::invalid_argument, "bootstrap: empty camera path");
    std::vector<Camera> cams;
    for (int v : video) cams.push_back(inputs.frames[v].view.camera);
    require(trajectory::is_stationary(cams, scene_diagonal), Errc::invalid_argument,
            "bootstrap: input camera moves; select anchors by farthest point sampling instead");
    const View first = inputs.frames[video.front()].view;
    const std::vector<Image> images = bullet_time(std::span<const View>(&first, 1), 0, path, denoiser, cfg);
    InputSet out = inputs;
    for (std::size_t i = 0; i < path.size(); ++i)
        out.frames.push_back(Frame{View{images[i], path[i], 0.0}, FillState::generated});
    return out;
}

trajectory::TrajectoryPlan bootstrap_plan(const InputSet& augmented, int path_count,
                                          std::vector<Camera> novel_cameras) {
    const int total = static_cast<int>(augmented.frames.size());
    require(path_count >= 1 && path_count <= total, Errc::invalid_argument, "bootstrap plan: bad path count");
    trajectory::TrajectoryPlan plan;
    plan.kind = novel_cameras.empty() ? trajectory::PathKind::reuse_input : trajectory::PathKind::orbit;
    for (int i = total - path_count; i < total; ++i) plan.anchor_indices.push_back(i);
    plan.novel_cameras = std::move(novel_cameras);
    return plan;
}

}  // namespace mvgrid::gridsampler
