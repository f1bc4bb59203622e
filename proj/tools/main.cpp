#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "json_config.hpp"
#include "mvgrid/consistency.hpp"
#include "mvgrid/curation.hpp"
#include "mvgrid/error.hpp"
#include "mvgrid/grid_io.hpp"
#include "mvgrid/grid_sampler.hpp"
#include "mvgrid/metrics.hpp"
#include "mvgrid/optimize.hpp"
#include "mvgrid/oracle.hpp"
#include "mvgrid/serialize.hpp"
#include "mvgrid/toyworld.hpp"
#include "mvgrid/trajectory.hpp"

namespace fs = std::filesystem;
using namespace mvgrid;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
};

struct PathFlags {
    std::string kind = "orbit";
    trajectory::PathParams params;
    int size = 64;

    void add(CLI::App* app, const std::string& prefix = "") {
        const std::vector<std::string> kinds{"reuse_input", "forward_spiral", "inout_spiral", "orbit"};
        app->add_option("--" + prefix + "kind", kind, "Camera path kind")->check(CLI::IsMember(kinds))
            ->capture_default_str();
        app->add_option("--" + prefix + "radius", params.radius, "Path radius")->capture_default_str();
        app->add_option("--" + prefix + "turns", params.turns, "Revolutions along the path")->capture_default_str();
        app->add_option("--" + prefix + "count", params.count, "Cameras on the path")->capture_default_str();
        app->add_option("--" + prefix + "elevation", params.elevation_deg, "Elevation in degrees")
            ->capture_default_str();
        app->add_option("--" + prefix + "amplitude", params.spiral_amplitude, "Spiral amplitude")
            ->capture_default_str();
        app->add_option("--" + prefix + "fov", params.fov_x_deg, "Horizontal field of view in degrees")
            ->capture_default_str();
    }

    trajectory::PathParams resolved() const {
        trajectory::PathParams p = params;
        p.width = size;
        p.height = size;
        return p;
    }

    trajectory::PathKind path_kind() const { return trajectory::path_kind_from_string(kind); }

    std::vector<Camera> cameras() const {
        const trajectory::PathKind k = path_kind();
        require(k != trajectory::PathKind::reuse_input, Errc::invalid_argument,
                "a camera path kind other than reuse_input is required here");
        return trajectory::make_path(k, resolved());
    }
};

struct SamplingFlags {
    gridsampler::SamplerConfig cfg;
    std::string schedule = "mv:25,t:16,mv:8";
    diffusion::CorruptionSpec corruption;

    void add(CLI::App* app) {
        app->add_option("--k", cfg.k, "Anchor cameras (grid rows)")->capture_default_str();
        app->add_option("--k-prime", cfg.k_prime, "Dense novel views per timestep")->capture_default_str();
        app->add_option("--n", cfg.n, "Targets per window")->capture_default_str();
        app->add_option("--m", cfg.m, "Conditioning views per window")->capture_default_str();
        app->add_option("--schedule", schedule, "Pass schedule, e.g. mv:25,t:16,mv:8")->capture_default_str();
        app->add_option("--s-image", cfg.guidance.s_image, "Image guidance scale")->capture_default_str();
        app->add_option("--s-time", cfg.guidance.s_time, "Time guidance scale")->capture_default_str();
        app->add_option("--corrupt-bias", corruption.bias, "Oracle colour bias amplitude")->capture_default_str();
        app->add_option("--corrupt-jitter", corruption.jitter, "Oracle time jitter")->capture_default_str();
        app->add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
    }

    gridsampler::SamplerConfig resolved(std::uint64_t seed) const {
        gridsampler::SamplerConfig c = cfg;
        c.schedule = gridsampler::parse_schedule(schedule);
        c.seed = seed;
        c.validate();
        return c;
    }
};

fs::path require_out(const Globals& g) {
    require(!g.out.empty(), Errc::invalid_argument, "--out is required");
    return g.out;
}

toyworld::SceneSpec load_scene(const std::string& path) {
    return read_json_file(path).get<toyworld::SceneSpec>();
}

gridsampler::InputSet load_video(const std::string& dir) {
    gridsampler::InputSet inputs;
    inputs.frames = grid_to_frames(load_grid(dir));
    return inputs;
}

std::vector<Frame> grid_frames(const ViewGrid& grid) {
    std::vector<Frame> frames;
    for (int r = 0; r < grid.rows(); ++r) {
        for (int c = 0; c < grid.cols(); ++c) {
            if (grid.fill(r, c) != FillState::empty) frames.push_back(Frame{grid.view(r, c), grid.fill(r, c)});
        }
    }
    return frames;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::io, "cannot write " + path.string());
    out << text;
}

void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

// ---- world ----------------------------------------------------------------

struct WorldCmd {
    int primitives = 3;
    int frames = 8;
    bool static_camera = false;
    PathFlags path;

    void add(CLI::App& app) {
        path.params.turns = 1.0 / 3.0;
        auto* sub = app.add_subcommand("world", "Generate a toy scene and render an input video");
        sub->add_option("--primitives", primitives, "Number of primitives")->capture_default_str();
        sub->add_option("--frames", frames, "Video frames (0 writes the scene only)")->capture_default_str();
        sub->add_flag("--static-camera", static_camera, "Render every frame from the first path camera");
        sub->add_option("--size", path.size, "Image width and height")->capture_default_str();
        path.add(sub);
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        fs::create_directories(out);
        const toyworld::SceneSpec scene = toyworld::generate_scene(g.seed, primitives);
        write_json_file(out / "scene.json", scene);
        if (frames <= 0) return;
        PathFlags p = path;
        p.params.count = frames;
        std::vector<Camera> cams = p.cameras();
        if (static_camera) cams.assign(frames, cams.front());
        std::vector<double> raw(frames);
        for (int i = 0; i < frames; ++i) raw[i] = i;
        const std::vector<double> times = normalize_times(raw);
        const std::vector<View> video = toyworld::render_input_video(scene, cams, times);
        save_grid(video_to_grid(video, raw), out / "video");
        std::printf("wrote %s (scene, %d frames)\n", out.string().c_str(), frames);
    }
};

// ---- plan -----------------------------------------------------------------

struct PlanCmd {
    std::string input;
    int k = 13;
    PathFlags path;

    void add(CLI::App& app) {
        path.kind = "reuse_input";
        auto* sub = app.add_subcommand("plan", "Choose anchor frames and novel cameras for an input video");
        sub->add_option("--input", input, "Input video grid directory")->required();
        sub->add_option("--k", k, "Anchor count")->capture_default_str();
        path.add(sub);
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        const gridsampler::InputSet inputs = load_video(input);
        PathFlags p = path;
        p.size = inputs.frames.front().view.image.width;
        const trajectory::TrajectoryPlan plan =
            trajectory::make_plan(inputs.cameras(), k, p.path_kind(), p.resolved());
        ensure_parent(out);
        write_json_file(out, plan);
        std::printf("plan: %zu anchors, %zu novel cameras\n", plan.anchor_indices.size(), plan.novel_cameras.size());
    }
};

// ---- filter ---------------------------------------------------------------

struct FilterCmd {
    std::string input;
    double threshold = curation::kStaticThreshold;
    int patch = curation::kCornerPatch;

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("filter", "Flag static-viewpoint videos by corner-patch motion");
        sub->add_option("--input", input, "Directory of videos, one folder of PNG frames each")->required();
        sub->add_option("--threshold", threshold, "Corner RMS threshold")->capture_default_str();
        sub->add_option("--patch", patch, "Corner patch size")->capture_default_str();
    }

    void run(const Globals& g) const {
        std::vector<fs::path> videos;
        for (const auto& entry : fs::directory_iterator(input)) {
            if (entry.is_directory()) videos.push_back(entry.path());
        }
        std::sort(videos.begin(), videos.end());
        nlohmann::json verdicts = nlohmann::json::array();
        for (const fs::path& dir : videos) {
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.path().extension() == ".png") files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            std::vector<Image> frames;
            for (const fs::path& f : files) frames.push_back(read_png16(f));
            const std::vector<double> scores = curation::corner_scores(frames, patch);
            const bool keep = std::all_of(scores.begin(), scores.end(), [&](double s) { return s < threshold; });
            verdicts.push_back({{"video", dir.filename().string()}, {"static_view", keep}, {"corner_scores", scores}});
        }
        if (g.out.empty()) {
            std::cout << verdicts.dump(2) << "\n";
        } else {
            ensure_parent(g.out);
            write_json_file(g.out, verdicts);
        }
    }
};

// ---- sample ---------------------------------------------------------------

struct SampleCmd {
    std::string scene_path;
    std::string input;
    std::string plan_path;
    std::string mode = "grid";
    int target = 0;
    std::vector<int> frames;
    bool times_unknown = false;
    SamplingFlags sampling;
    PathFlags path;

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("sample", "Sample a multi-view video grid with the oracle denoiser");
        sub->add_option("--scene", scene_path, "Scene JSON backing the oracle")->required();
        sub->add_option("--input", input, "Input video grid directory")->required();
        sub->add_option("--plan", plan_path, "Plan JSON (default: built from the path flags)");
        sub->add_option("--mode", mode, "grid or bullet")->check(CLI::IsMember({"grid", "bullet"}))
            ->capture_default_str();
        sub->add_option("--target", target, "Bullet mode: index of the frame whose time is kept")
            ->capture_default_str();
        sub->add_option("--frames", frames, "Bullet mode: other input frame indices (default: FPS)");
        sub->add_flag("--times-unknown", times_unknown, "Bullet mode: inputs carry no timestamps");
        sampling.add(sub);
        path.add(sub, "path-");
    }

    // The target first, then explicit --frames or FPS over the other cameras, M views in all.
    std::vector<int> bullet_inputs(const gridsampler::InputSet& inputs, int m) const {
        std::vector<int> chosen{target};
        if (!frames.empty()) {
            for (int f : frames) {
                require(f >= 0 && f < static_cast<int>(inputs.frames.size()), Errc::out_of_range,
                        "--frames holds an invalid frame index");
                if (f != target) chosen.push_back(f);
            }
            return chosen;
        }
        std::vector<int> order{target};
        for (int i = 0; i < static_cast<int>(inputs.frames.size()); ++i) {
            if (i != target) order.push_back(i);
        }
        std::vector<Camera> cams;
        for (int i : order) cams.push_back(inputs.frames[i].view.camera);
        const int k = std::min(m, trajectory::distinct_center_count(cams));
        chosen.clear();
        for (int i : trajectory::farthest_point_sample(cams, k)) chosen.push_back(order[i]);
        return chosen;
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        const toyworld::SceneSpec scene = load_scene(scene_path);
        diffusion::CorruptionSpec corruption = sampling.corruption;
        corruption.seed = g.seed;
        const diffusion::OracleDenoiser oracle(scene, corruption);
        const gridsampler::SamplerConfig cfg = sampling.resolved(g.seed);
        gridsampler::InputSet inputs = load_video(input);
        PathFlags p = path;
        p.size = inputs.frames.front().view.image.width;

        if (mode == "bullet") {
            std::vector<Camera> cams;
            if (!plan_path.empty()) {
                cams = read_json_file(plan_path).get<trajectory::TrajectoryPlan>().novel_cameras;
            } else {
                cams = p.cameras();
            }
            const int count = static_cast<int>(inputs.frames.size());
            require(target >= 0 && target < count, Errc::out_of_range, "--target is not a frame index");
            const std::vector<int> chosen = bullet_inputs(inputs, cfg.bullet_m);
            std::vector<View> views;
            for (int i : chosen) views.push_back(inputs.frames[i].view);
            const std::vector<Image> images = gridsampler::bullet_time(views, 0, cams, oracle, cfg, {!times_unknown});
            const ViewGrid video = load_grid(input);
            ViewGrid grid(cams, {video.raw_times().at(target)}, {views.front().time}, p.size, p.size);
            for (int i = 0; i < grid.rows(); ++i) grid.set(i, 0, images[i], FillState::generated);
            save_grid(grid, out);
            std::printf("bullet time: %d views at t=%.4f\n", grid.rows(), views[target].time);
            return;
        }

        trajectory::TrajectoryPlan plan;
        if (!plan_path.empty()) plan = read_json_file(plan_path).get<trajectory::TrajectoryPlan>();
        if (trajectory::is_stationary(inputs.cameras(), scene.bounds.diagonal())) {
            PathFlags boot = p;
            boot.params.count = cfg.k;
            if (boot.path_kind() == trajectory::PathKind::reuse_input) boot.kind = "orbit";
            inputs = gridsampler::stationary_bootstrap(inputs, boot.cameras(), oracle, cfg, scene.bounds.diagonal());
            plan = gridsampler::bootstrap_plan(inputs, cfg.k, plan.novel_cameras);
        } else if (plan_path.empty()) {
            plan = trajectory::make_plan(inputs.cameras(), cfg.k, p.path_kind(), p.resolved());
        }
        const ViewGrid grid = gridsampler::alternate_sample(inputs, plan, oracle, cfg);
        save_grid(grid, out);
        std::printf("grid: %d cameras x %d times (%s)\n", grid.rows(), grid.cols(),
                    gridsampler::format_schedule(cfg.schedule).c_str());
    }
};

// ---- dense ----------------------------------------------------------------

struct DenseCmd {
    std::string scene_path;
    std::string grid_path;
    std::string plan_path;
    SamplingFlags sampling;
    PathFlags path;

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("dense", "Generate dense novel views for every column of a grid");
        sub->add_option("--scene", scene_path, "Scene JSON backing the oracle")->required();
        sub->add_option("--grid", grid_path, "Sampled grid directory")->required();
        sub->add_option("--plan", plan_path, "Plan JSON whose novel cameras are used");
        sampling.add(sub);
        path.add(sub, "path-");
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        diffusion::CorruptionSpec corruption = sampling.corruption;
        corruption.seed = g.seed;
        const diffusion::OracleDenoiser oracle(load_scene(scene_path), corruption);
        const ViewGrid grid = load_grid(grid_path);
        std::vector<Camera> cams;
        if (!plan_path.empty()) {
            cams = read_json_file(plan_path).get<trajectory::TrajectoryPlan>().novel_cameras;
        } else {
            PathFlags p = path;
            p.size = grid.width();
            p.params.count = sampling.cfg.k_prime;
            cams = p.cameras();
        }
        const ViewGrid dense = gridsampler::dense_views(grid, cams, oracle, sampling.resolved(g.seed));
        save_grid(dense, out);
        std::printf("dense: %d cameras x %d times\n", dense.rows(), dense.cols());
    }
};

// ---- recon ----------------------------------------------------------------

struct ReconCmd {
    std::string grid_path;
    std::string dense_path;
    std::string scene_path;
    recon4d::ReconConfig cfg;
    int log_every = 100;

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("recon", "Fit deformable Gaussians to a grid and optional dense views");
        sub->add_option("--grid", grid_path, "Sampled grid directory")->required();
        sub->add_option("--dense", dense_path, "Dense view grid directory");
        sub->add_option("--scene", scene_path, "Scene JSON whose bounds set the box (default [-1.2, 1.2]^3)");
        sub->add_option("--phase1", cfg.phase1_iters, "Static phase iterations")->capture_default_str();
        sub->add_option("--phase2", cfg.phase2_iters, "Dynamic phase iterations")->capture_default_str();
        sub->add_option("--batch", cfg.batch_size, "Views per step")->capture_default_str();
        sub->add_option("--densify-threshold", cfg.densify_grad_threshold, "Screen gradient threshold")
            ->capture_default_str();
        sub->add_option("--anneal-start", cfg.generated_multiplier_start, "Generated-view weight at phase 2 start")
            ->capture_default_str();
        sub->add_option("--anneal-end", cfg.generated_multiplier_end, "Generated-view weight at phase 2 end")
            ->capture_default_str();
        sub->add_option("--max-gaussians", cfg.max_gaussians, "Gaussian count cap")->capture_default_str();
        sub->add_option("--log-every", log_every, "Progress print interval (0 disables)")->capture_default_str();
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        fs::create_directories(out);
        std::vector<Frame> data = grid_frames(load_grid(grid_path));
        if (!dense_path.empty()) {
            const std::vector<Frame> extra = grid_frames(load_grid(dense_path));
            data.insert(data.end(), extra.begin(), extra.end());
        }
        recon4d::Aabb box{Vec3::Constant(-1.2), Vec3::Constant(1.2)};
        if (!scene_path.empty()) {
            const toyworld::SceneSpec scene = load_scene(scene_path);
            box = {scene.bounds.lo, scene.bounds.hi};
        }
        const int every = log_every;
        const recon4d::ReconResult result =
            recon4d::optimize(data, cfg, box, g.seed, nullptr, [every](const recon4d::TrainingLogEntry& e) {
                if (every > 0 && e.step % every == 0) {
                    std::printf("step %5d phase %d loss %.5f gaussians %d\n", e.step, e.phase, e.loss, e.gaussians);
                    std::fflush(stdout);
                }
            });
        recon4d::save_checkpoint(out / "model.json", result.cloud, result.field);
        recon4d::write_training_csv(out / "training.csv", result.log);
        std::printf("model: %d gaussians -> %s\n", result.cloud.size(), (out / "model.json").string().c_str());
    }
};

// ---- render ---------------------------------------------------------------

struct RenderCmd {
    std::string model;
    std::optional<double> time;
    PathFlags path;

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("render", "Render a camera path from a checkpoint to PNG frames");
        sub->add_option("--model", model, "Checkpoint JSON")->required();
        sub->add_option("--time", time, "Fixed time for every frame (default: 0 to 1 along the path)");
        sub->add_option("--size", path.size, "Image width and height")->capture_default_str();
        path.add(sub);
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        fs::create_directories(out);
        const auto [cloud, field] = recon4d::load_checkpoint(model);
        const std::vector<Camera> cams = path.cameras();
        const int n = static_cast<int>(cams.size());
        for (int i = 0; i < n; ++i) {
            const double t = time ? *time : (n > 1 ? static_cast<double>(i) / (n - 1) : 0.0);
            char name[32];
            std::snprintf(name, sizeof(name), "frame%04d.png", i);
            write_png16(out / name, recon4d::render_model(cloud, field, cams[i], t));
        }
        std::printf("rendered %d frames to %s\n", n, out.string().c_str());
    }
};

// ---- eval -----------------------------------------------------------------

struct EvalCmd {
    std::vector<std::string> grids;
    std::string scene_path;
    std::string model;
    std::vector<double> times{0.0, 0.5, 1.0};
    PathFlags path;

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("eval", "Score grids (consistency, PSNR) or a model against a scene");
        sub->add_option("--grid", grids, "Grid directories, one per seed");
        sub->add_option("--scene", scene_path, "Scene JSON providing ground truth");
        sub->add_option("--model", model, "Checkpoint JSON scored on the path cameras (requires --scene)");
        sub->add_option("--times", times, "Model mode: times rendered per path camera")->capture_default_str();
        path.add(sub, "path-");
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        fs::create_directories(out);
        require(!grids.empty() || !model.empty(), Errc::invalid_argument, "eval needs --grid or --model");
        std::optional<toyworld::SceneSpec> scene;
        if (!scene_path.empty()) scene = load_scene(scene_path);
        nlohmann::json report = nlohmann::json::object();
        std::string csv;

        if (!grids.empty()) {
            std::vector<metrics::ConsistencyReport> reports;
            std::vector<std::uint64_t> seeds;
            metrics::ConsistencyOptions opts;
            opts.seed = g.seed;
            csv += "grid,psnr_mean,psnr_min,temporal_inconsistency,view_inconsistency,combined\n";
            for (std::size_t i = 0; i < grids.size(); ++i) {
                const metrics::ConsistencyReport r =
                    metrics::consistency_report(load_grid(grids[i]), scene ? &*scene : nullptr, opts);
                char line[512];
                std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.8f,%.8f,%.8f\n", grids[i].c_str(), r.psnr_mean,
                              r.psnr_min, r.temporal_inconsistency, r.view_inconsistency, r.combined());
                csv += line;
                reports.push_back(r);
                seeds.push_back(i);
            }
            report["grids"] = metrics::to_json(metrics::aggregate(reports, seeds));
        }

        if (!model.empty()) {
            require(scene.has_value(), Errc::invalid_argument, "--model needs --scene");
            const auto [cloud, field] = recon4d::load_checkpoint(model);
            PathFlags p = path;
            const std::vector<Camera> cams = p.cameras();
            nlohmann::json views = nlohmann::json::array();
            double sum = 0.0;
            std::string rows = "camera,time,psnr,ssim\n";
            for (std::size_t c = 0; c < cams.size(); ++c) {
                for (double t : times) {
                    const Image gt = toyworld::render(*scene, cams[c], t);
                    const Image im = recon4d::render_model(cloud, field, cams[c], t);
                    const double psnr = metrics::psnr(im, gt);
                    const double ssim = metrics::ssim(im, gt);
                    sum += psnr;
                    views.push_back({{"camera", c}, {"time", t}, {"psnr", psnr}, {"ssim", ssim}});
                    char line[128];
                    std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f,%.6f\n", c, t, psnr, ssim);
                    rows += line;
                }
            }
            report["model"] = {{"views", views}, {"psnr_mean", sum / static_cast<double>(views.size())}};
            write_text(out / "model_eval.csv", rows);
        }

        if (!csv.empty()) write_text(out / "report.csv", csv);
        write_json_file(out / "report.json", report);
        std::cout << report.dump(2) << "\n";
    }
};

// ---- slice ----------------------------------------------------------------

struct SliceCmd {
    std::string grid_path;
    int camera = 0;
    int row = -1;

    void add(CLI::App& app) {
        auto* sub = app.add_subcommand("slice", "Space-time slice of one grid row");
        sub->add_option("--grid", grid_path, "Grid directory")->required();
        sub->add_option("--camera", camera, "Grid row (camera index)")->capture_default_str();
        sub->add_option("--row", row, "Pixel row (default: middle)");
    }

    void run(const Globals& g) const {
        const fs::path out = require_out(g);
        const ViewGrid grid = load_grid(grid_path);
        std::vector<Image> frames;
        for (int c = 0; c < grid.cols(); ++c) frames.push_back(grid.image(camera, c));
        const int y = row < 0 ? grid.height() / 2 : row;
        ensure_parent(out);
        write_png16(out, metrics::spacetime_slice(frames, y));
        std::printf("slice: %d x %d -> %s\n", grid.width(), grid.cols(), out.string().c_str());
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mvgrid: multi-view video grid sampling and 4D reconstruction on a toy world"};
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<cli::JsonConfig>());
    app.set_config("--config", "", "JSON file with option values");

    Globals globals;
    app.add_option("--seed", globals.seed, "Random seed")->capture_default_str();
    app.add_option("--out", globals.out, "Output path");

    WorldCmd world;
    PlanCmd plan;
    FilterCmd filter;
    SampleCmd sample;
    DenseCmd dense;
    ReconCmd recon;
    RenderCmd render;
    EvalCmd eval;
    SliceCmd slice;
    world.add(app);
    plan.add(app);
    filter.add(app);
    sample.add(app);
    dense.add(app);
    recon.add(app);
    render.add(app);
    eval.add(app);
    slice.add(app);

    CLI11_PARSE(app, argc, argv);

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "world") world.run(globals);
        else if (name == "plan") plan.run(globals);
        else if (name == "filter") filter.run(globals);
        else if (name == "sample") sample.run(globals);
        else if (name == "dense") dense.run(globals);
        else if (name == "recon") recon.run(globals);
        else if (name == "render") render.run(globals);
        else if (name == "eval") eval.run(globals);
        else if (name == "slice") slice.run(globals);
    } catch (const Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", to_string(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
