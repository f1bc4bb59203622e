#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "mvgrid/grid_sampler.hpp"
#include "mvgrid/metrics.hpp"
#include "mvgrid/oracle.hpp"

using namespace mvgrid;
using namespace mvgrid::gridsampler;
using test::code_of;

namespace {

constexpr int kSize = 32;

struct Scenario {
    toyworld::SceneSpec scene;
    InputSet inputs;
    trajectory::TrajectoryPlan plan;
    std::vector<double> times;

    Scenario(int frames, int k, bool frozen_scene = false, double turns = 1.0 / 3.0) {
        scene = toyworld::generate_scene(1, 3);
        if (frozen_scene) scene = toyworld::frozen(scene);
        trajectory::PathParams p;
        p.turns = turns;
        p.count = frames;
        p.width = p.height = kSize;
        const auto cams = trajectory::make_path(trajectory::PathKind::orbit, p);
        std::vector<double> raw(frames);
        for (int i = 0; i < frames; ++i) raw[i] = i;
        times = normalize_times(raw);
        for (const View& v : toyworld::render_input_video(scene, cams, times)) {
            inputs.frames.push_back({v, FillState::input});
        }
        plan = trajectory::make_plan(cams, k, trajectory::PathKind::orbit, p);
    }

    SamplerConfig config(int k) const {
        SamplerConfig cfg;
        cfg.k = k;
        cfg.guidance = {1.0, 1.0};
        cfg.seed = 3;
        return cfg;
    }

    double grid_psnr(const ViewGrid& g) const {
        double sum = 0.0;
        for (int r = 0; r < g.rows(); ++r) {
            for (int c = 0; c < g.cols(); ++c) {
                sum += metrics::psnr(g.image(r, c), toyworld::render(scene, g.camera(r), g.time(c)));
            }
        }
        return sum / (g.rows() * g.cols());
    }
};

}  // namespace

TEST(Window, Examples) {
    EXPECT_EQ(window_indices(2, 3, 4), (std::vector<int>{2, 3, 0}));
    EXPECT_EQ(window_indices(0, 5, 5), (std::vector<int>{0, 1, 2, 3, 4}));
    EXPECT_EQ(code_of([] { window_indices(4, 3, 4); }), Errc::out_of_range);
}

TEST(Window, Coverage) {
    for (auto [size, n] : {std::pair{13, 8}, std::pair{8, 8}, std::pair{6, 6}, std::pair{9, 2}}) {
        std::vector<int> count(size, 0);
        for (int j = 0; j < size; ++j) {
            const auto w = window_indices(j, n, size);
            ASSERT_EQ(static_cast<int>(w.size()), n);
            for (int i : w) ++count[i];
        }
        for (int c : count) EXPECT_EQ(c, n);
    }
}

TEST(PixelMedian, SingleImage) {
    const Image a = test::random_image(5, 4, 1);
    EXPECT_EQ(pixel_median(std::vector<Image>{a}), a);
}

TEST(PixelMedian, RejectsOutlier) {
    const Image a = test::random_image(6, 6, 2);
    Image c = a;
    for (double& v : c.data) v += 0.7;
    EXPECT_EQ(pixel_median(std::vector<Image>{a, a, c}), a);
    EXPECT_EQ(pixel_median(std::vector<Image>{c, a, a}), a);
}

TEST(PixelMedian, PermutationInvariantAndLowerMiddle) {
    std::vector<Image> imgs;
    for (int i = 0; i < 6; ++i) imgs.push_back(test::random_image(4, 4, 10 + i));
    const Image m = pixel_median(imgs);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(imgs.begin(), imgs.end(), rng);
        EXPECT_EQ(pixel_median(imgs), m);
    }
    for (std::size_t k = 0; k < m.data.size(); ++k) {
        std::vector<double> v;
        for (const Image& img : imgs) v.push_back(img.data[k]);
        std::sort(v.begin(), v.end());
        EXPECT_EQ(m.data[k], v[2]);
    }
    EXPECT_EQ(code_of([] { pixel_median(std::vector<Image>{}); }), Errc::invalid_argument);
}

TEST(Schedule, ParseAndFormat) {
    const auto s = parse_schedule("mv:25,t:16,mv:8");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[1], (PassSpec{PassKind::temporal, 16}));
    EXPECT_EQ(format_schedule(s), "mv:25,t:16,mv:8");
    EXPECT_EQ(s, SamplerConfig{}.schedule);
    EXPECT_EQ(code_of([] { parse_schedule("mv25"); }), Errc::invalid_argument);
    EXPECT_EQ(code_of([] { parse_schedule("xx:3"); }), Errc::invalid_argument);
    EXPECT_EQ(code_of([] { parse_schedule(""); }), Errc::invalid_argument);
}

TEST(Config, Validation) {
    SamplerConfig c;
    c.validate();
    EXPECT_EQ(c.k, 13);
    EXPECT_EQ(c.k_prime, 128);
    EXPECT_EQ(c.n, 8);
    EXPECT_EQ(c.m, 9);
    EXPECT_EQ(c.bullet_n, 13);
    EXPECT_EQ(c.bullet_m, 3);
    c.m = 8;
    EXPECT_EQ(code_of([&] { c.validate(); }), Errc::invalid_argument);
    c = {};
    c.schedule = parse_schedule("t:16");
    EXPECT_EQ(code_of([&] { c.validate(); }), Errc::invalid_argument);
}

TEST(MakeGrid, PinsInputs) {
    const Scenario s(6, 3);
    const ViewGrid g = make_grid(s.inputs, s.plan);
    EXPECT_EQ(g.rows(), 3);
    EXPECT_EQ(g.cols(), 6);
    for (int r = 0; r < 3; ++r) {
        const int a = s.plan.anchor_indices[r];
        EXPECT_EQ(g.fill(r, a), FillState::input);
        EXPECT_EQ(g.image(r, a), s.inputs.frames[a].view.image);
    }
}

TEST(MultiviewPass, SingleWindowExactOracle) {
    const Scenario s(3, 3);
    SamplerConfig cfg = s.config(3);
    cfg.n = 3;
    cfg.m = 4;
    const diffusion::OracleDenoiser oracle(s.scene);
    PassTrace trace;
    const ViewGrid g = multiview_pass(make_grid(s.inputs, s.plan), s.inputs, s.plan, oracle, cfg, 25, 0, &trace);
    EXPECT_TRUE(g.complete());
    EXPECT_GE(s.grid_psnr(g), 60.0);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) EXPECT_EQ(trace.at(r, c).size(), 3u);
    }
}

TEST(MultiviewPass, ExactOracleWindowsAgree) {
    const Scenario s(13, 13, false, 1.0);
    const SamplerConfig cfg = s.config(13);
    const diffusion::OracleDenoiser oracle(s.scene);
    PassTrace trace;
    const ViewGrid g = multiview_pass(make_grid(s.inputs, s.plan), s.inputs, s.plan, oracle, cfg, 25, 0, &trace);
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const auto& cand = trace.at(r, c);
            ASSERT_EQ(cand.size(), 8u);
            for (const Image& img : cand) EXPECT_LT(max_abs_diff(img, cand.front()), 1e-3);
            if (g.fill(r, c) == FillState::generated) {
                EXPECT_LT(max_abs_diff(g.image(r, c), cand.front()), 1e-3);
            }
        }
    }
}

TEST(MultiviewPass, MedianBeatsMeanWindowErrorUnderJitter) {
    Scenario wide(8, 6, false, 1.0);
    const SamplerConfig cfg = wide.config(6);
    const diffusion::OracleDenoiser oracle(wide.scene, {0.0, 0.05, 7});
    PassTrace trace;
    const ViewGrid g =
        multiview_pass(make_grid(wide.inputs, wide.plan), wide.inputs, wide.plan, oracle, cfg, 25, 0, &trace);
    double median_err = 0.0;
    double mean_err = 0.0;
    int cells = 0;
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            if (g.fill(r, c) == FillState::input) continue;
            const Image gt = toyworld::render(wide.scene, g.camera(r), g.time(c));
            median_err += l2_distance(g.image(r, c), gt);
            double m = 0.0;
            for (const Image& img : trace.at(r, c)) m += l2_distance(img, gt);
            mean_err += m / static_cast<double>(trace.at(r, c).size());
            ++cells;
        }
    }
    ASSERT_GT(cells, 0);
    EXPECT_LE(median_err / cells, mean_err / cells);
}

TEST(TemporalPass, SingleWindowExactOracle) {
    const Scenario s(4, 2);
    SamplerConfig cfg = s.config(2);
    cfg.n = 4;
    cfg.m = 5;
    const diffusion::OracleDenoiser oracle(s.scene);
    const ViewGrid g = temporal_pass(make_grid(s.inputs, s.plan), s.inputs, s.plan, oracle, cfg, 25);
    EXPECT_TRUE(g.complete());
    EXPECT_GE(s.grid_psnr(g), 60.0);
}

TEST(TemporalPass, WindowCount) {
    const Scenario s(8, 2);
    const diffusion::OracleDenoiser oracle(s.scene);
    PassTrace trace;
    temporal_pass(make_grid(s.inputs, s.plan), s.inputs, s.plan, oracle, s.config(2), 25, 0, &trace);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 8; ++c) EXPECT_EQ(trace.at(r, c).size(), 8u);
    }
}

TEST(TemporalPass, StaticSceneConvergedGridUnchanged) {
    const Scenario s(5, 3, true);
    const SamplerConfig cfg = s.config(3);
    const diffusion::OracleDenoiser oracle(s.scene);
    const ViewGrid g = alternate_sample(s.inputs, s.plan, oracle, cfg);
    const ViewGrid again = temporal_pass(g, s.inputs, s.plan, oracle, cfg, 16, 7);
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) EXPECT_LT(max_abs_diff(g.image(r, c), again.image(r, c)), 1e-3);
    }
}

TEST(AlternateSample, FilledPinnedDeterministicParallelSafe) {
    const Scenario s(6, 4);
    SamplerConfig cfg = s.config(4);
    const diffusion::OracleDenoiser oracle(s.scene, {0.03, 0.05, 2});
    const ViewGrid a = alternate_sample(s.inputs, s.plan, oracle, cfg);
    EXPECT_TRUE(a.complete());
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            if (a.camera(r) == s.inputs.frames[c].view.camera) {
                EXPECT_EQ(a.fill(r, c), FillState::input);
                EXPECT_EQ(a.image(r, c), s.inputs.frames[c].view.image);
            } else {
                EXPECT_EQ(a.fill(r, c), FillState::generated);
            }
        }
    }
    EXPECT_EQ(alternate_sample(s.inputs, s.plan, oracle, cfg), a);
    cfg.threads = 3;
    EXPECT_EQ(alternate_sample(s.inputs, s.plan, oracle, cfg), a);
}

TEST(AlternateSample, ExactOracleIdempotentUnderExtraPass) {
    const Scenario s(5, 4);
    const SamplerConfig cfg = s.config(4);
    const diffusion::OracleDenoiser oracle(s.scene);
    const ViewGrid g = alternate_sample(s.inputs, s.plan, oracle, cfg);
    EXPECT_GE(s.grid_psnr(g), 40.0);
    const ViewGrid again = multiview_pass(g, s.inputs, s.plan, oracle, cfg, 1, 9);
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) EXPECT_LE(max_abs_diff(g.image(r, c), again.image(r, c)), 1e-2);
    }
}

TEST(AlternateSample, SdeditNeedsCompleteGrid) {
    const Scenario s(4, 2);
    const diffusion::OracleDenoiser oracle(s.scene);
    EXPECT_EQ(code_of([&] { multiview_pass(make_grid(s.inputs, s.plan), s.inputs, s.plan, oracle, s.config(2), 8); }),
              Errc::missing_cell);
}

TEST(StationaryBootstrap, AppendsGroundTruthViews) {
    const toyworld::SceneSpec scene = toyworld::generate_scene(4, 3);
    const Camera fixed = test::test_camera(Vec3(0.3, 0.8, 3.0), kSize);
    const std::vector<Camera> cams(5, fixed);
    std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    InputSet inputs;
    for (const View& v : toyworld::render_input_video(scene, cams, times)) inputs.frames.push_back({v, FillState::input});
    trajectory::PathParams p;
    p.count = 4;
    p.width = p.height = kSize;
    const auto path = trajectory::make_path(trajectory::PathKind::orbit, p);
    SamplerConfig cfg;
    cfg.k = 4;
    cfg.guidance = {1.0, 1.0};
    const diffusion::OracleDenoiser oracle(scene);
    const InputSet aug = stationary_bootstrap(inputs, path, oracle, cfg, scene.bounds.diagonal());
    ASSERT_EQ(aug.frames.size(), 9u);
    EXPECT_EQ(aug.video_indices().size(), 5u);
    for (int i = 0; i < 4; ++i) {
        const Frame& f = aug.frames[5 + i];
        EXPECT_EQ(f.provenance, FillState::generated);
        EXPECT_EQ(f.view.time, 0.0);
        EXPECT_GE(metrics::psnr(f.view.image, toyworld::render(scene, path[i], 0.0)), 60.0);
    }
    const auto plan = bootstrap_plan(aug, 4);
    EXPECT_EQ(plan.anchor_indices, (std::vector<int>{5, 6, 7, 8}));
    const ViewGrid g = alternate_sample(aug, plan, oracle, cfg);
    EXPECT_TRUE(g.complete());
    EXPECT_EQ(g.rows(), 4);
    EXPECT_EQ(g.cols(), 5);

    trajectory::PathParams q = p;
    q.count = 5;
    InputSet moving;
    for (const View& v : toyworld::render_input_video(scene, trajectory::make_path(trajectory::PathKind::orbit, q), times)) {
        moving.frames.push_back({v, FillState::input});
    }
    EXPECT_EQ(code_of([&] { stationary_bootstrap(moving, path, oracle, cfg, scene.bounds.diagonal()); }),
              Errc::invalid_argument);
}

TEST(BulletTime, NearestAnchors) {
    std::vector<Camera> anchors;
    for (int x = 0; x < 3; ++x) anchors.push_back(test::test_camera(Vec3(x, 0, 3), 8, Vec3(x, 0, 0)));
    EXPECT_EQ(nearest_anchors(anchors, Vec3(2.1, 0, 3), 2), (std::vector<int>{2, 1}));
    EXPECT_EQ(code_of([&] { nearest_anchors(anchors, Vec3::Zero(), 4); }), Errc::invalid_argument);
}

TEST(BulletTime, ExactOracleAtTargetTime) {
    const toyworld::SceneSpec scene = toyworld::generate_scene(5, 3);
    trajectory::PathParams p;
    p.count = 3;
    p.width = p.height = kSize;
    const auto in_cams = trajectory::make_path(trajectory::PathKind::orbit, p);
    const std::vector<double> times{0.1, 0.5, 0.9};
    std::vector<View> inputs = toyworld::render_input_video(scene, in_cams, times);
    p.count = 17;
    p.elevation_deg = 25.0;
    std::vector<Camera> cams = trajectory::make_path(trajectory::PathKind::orbit, p);
    cams.insert(cams.end(), in_cams.begin(), in_cams.end());
    SamplerConfig cfg;
    cfg.guidance = {1.0, 1.0};
    const diffusion::OracleDenoiser oracle(scene);
    const auto out = bullet_time(inputs, 1, cams, oracle, cfg);
    ASSERT_EQ(out.size(), cams.size());
    for (std::size_t i = 0; i < cams.size(); ++i) {
        EXPECT_GE(metrics::psnr(out[i], toyworld::render(scene, cams[i], 0.5)), 60.0) << "camera " << i;
    }
}

TEST(BulletTime, SingleCallWhenCountEqualsN) {
    const toyworld::SceneSpec scene = toyworld::generate_scene(5, 2);
    trajectory::PathParams p;
    p.count = 13;
    p.width = p.height = 8;
    const auto cams = trajectory::make_path(trajectory::PathKind::orbit, p);
    const std::vector<View> inputs{View{toyworld::render(scene, cams[0], 0.0), cams[0], 0.0}};
    const diffusion::OracleDenoiser inner(scene);
    struct Counting final : diffusion::Denoiser {
        const diffusion::Denoiser& inner;
        mutable int calls = 0;
        explicit Counting(const diffusion::Denoiser& d) : inner(d) {}
        std::vector<Image> predict(const diffusion::LatentBatch& b, const diffusion::ConditioningSet& c) const override {
            ++calls;
            return inner.predict(b, c);
        }
    };
    Counting counting(inner);
    SamplerConfig cfg;
    cfg.guidance = {1.0, 1.0};
    bullet_time(inputs, 0, cams, counting, cfg);
    EXPECT_EQ(counting.calls, 25);
    cfg.bullet_n = 2;
    EXPECT_EQ(code_of([&] { bullet_time(inputs, 0, cams, counting, cfg); }), Errc::invalid_argument);
}

TEST(DenseViews, CountsAndExactOracle) {
    const Scenario s(4, 3);
    const SamplerConfig cfg = s.config(3);
    const diffusion::OracleDenoiser oracle(s.scene);
    const ViewGrid g = alternate_sample(s.inputs, s.plan, oracle, cfg);
    const ViewGrid none = dense_views(g, std::vector<Camera>{}, oracle, cfg);
    EXPECT_EQ(none.rows(), 0);
    trajectory::PathParams p;
    p.count = 16;
    p.elevation_deg = 25.0;
    p.width = p.height = kSize;
    const auto novel = trajectory::make_path(trajectory::PathKind::orbit, p);
    const ViewGrid dense = dense_views(g, novel, oracle, cfg);
    EXPECT_EQ(dense.rows(), 16);
    EXPECT_EQ(dense.cols(), g.cols());
    EXPECT_TRUE(dense.complete());
    EXPECT_GE(s.grid_psnr(dense), 40.0);
    ViewGrid partial = g;
    partial.clear(0, 0);
    EXPECT_EQ(code_of([&] { dense_views(partial, novel, oracle, cfg); }), Errc::missing_cell);
}
