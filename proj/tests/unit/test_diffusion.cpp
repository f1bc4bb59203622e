#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "mvgrid/diffusion.hpp"
#include "mvgrid/metrics.hpp"
#include "mvgrid/oracle.hpp"

using namespace mvgrid;
using namespace mvgrid::diffusion;
using test::code_of;

namespace {

std::vector<double> random_field(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    return v;
}

const GuidanceConfig kUnit{1.0, 1.0};

struct OracleSetup {
    toyworld::SceneSpec scene = toyworld::generate_scene(3, 3);
    Camera cam = test::test_camera(Vec3(0.5, 0.8, 3.0), 32);
    ConditioningSet cond;

    OracleSetup() {
        const Camera c0 = test::test_camera(Vec3(-1.0, 0.5, 3.0), 32);
        cond.views.push_back(View{toyworld::render(scene, c0, 0.2), c0, 0.2});
    }
};

}  // namespace

TEST(Schedule, Examples) {
    const NoiseSchedule s = make_schedule();
    ASSERT_EQ(s.alpha_bar.size(), 1000u);
    EXPECT_NEAR(s.alpha_bar[0], 0.9999, 1e-15);
    for (std::size_t i = 1; i < s.alpha_bar.size(); ++i) EXPECT_LT(s.alpha_bar[i], s.alpha_bar[i - 1]);
    for (double a : s.alpha_bar) EXPECT_TRUE(a > 0.0 && a <= 1.0);
    ASSERT_EQ(s.substep_indices.size(), 25u);
    for (std::size_t i = 1; i < s.substep_indices.size(); ++i) {
        EXPECT_EQ(s.substep_indices[i - 1] - s.substep_indices[i], 40);
    }
}

TEST(Schedule, LevelConvention) {
    const NoiseSchedule s = make_schedule();
    EXPECT_EQ(s.level_alpha_bar(0), 1.0);
    EXPECT_EQ(s.level_alpha_bar(25), s.alpha_bar[s.substep_indices.front()]);
    EXPECT_EQ(s.level_alpha_bar(1), s.alpha_bar[s.substep_indices.back()]);
    EXPECT_EQ(code_of([&] { s.level_alpha_bar(26); }), Errc::out_of_range);
}

TEST(Schedule, TooManySteps) {
    EXPECT_EQ(code_of([] { make_schedule(10, 11); }), Errc::invalid_argument);
}

TEST(CfgEpsilon, EqualInputsAreFixed) {
    const auto e = random_field(64, 1);
    for (double si : {0.0, 1.0, 3.0, 7.5}) {
        for (double st : {0.0, 0.5, 4.5}) {
            const auto out = cfg_epsilon(e, e, e, {si, st});
            for (std::size_t k = 0; k < e.size(); ++k) EXPECT_NEAR(out[k], e[k], 1e-12);
        }
    }
}

TEST(CfgEpsilon, Reductions) {
    const auto u = random_field(256, 1);
    const auto i = random_field(256, 2);
    const auto f = random_field(256, 3);
    EXPECT_EQ(cfg_epsilon(u, i, f, {1.0, 1.0}), f);
    EXPECT_EQ(cfg_epsilon(u, i, f, {0.0, 0.0}), u);
    const auto f2 = random_field(256, 4);
    EXPECT_EQ(cfg_epsilon(u, i, f, {2.0, 0.0}), cfg_epsilon(u, i, f2, {2.0, 0.0}));
}

TEST(CfgEpsilon, MatchesFormulaAtDefaults) {
    const auto u = random_field(512, 5);
    const auto i = random_field(512, 6);
    const auto f = random_field(512, 7);
    const GuidanceConfig g;
    EXPECT_EQ(g.s_image, 3.0);
    EXPECT_EQ(g.s_time, 4.5);
    const auto out = cfg_epsilon(u, i, f, g);
    for (std::size_t k = 0; k < u.size(); ++k) {
        EXPECT_NEAR(out[k], u[k] + 3.0 * (i[k] - u[k]) + 4.5 * (f[k] - i[k]), 1e-12);
    }
}

TEST(CfgEpsilon, ShapeMismatch) {
    EXPECT_EQ(code_of([] { cfg_epsilon(random_field(3, 1), random_field(3, 2), random_field(4, 3), {}); }),
              Errc::shape_mismatch);
}

TEST(DdimStep, ConsistentEpsilonRecoversX0) {
    const NoiseSchedule s = make_schedule();
    const Image x0 = test::random_image(8, 8, 2);
    for (int start : {1, 8, 16, 25}) {
        LatentBatch b;
        b.targets = gaussian_noise(1, 8, 8, 11);
        b.target_cameras = {test::test_camera(Vec3(0, 0, 3), 8)};
        b.target_times = {0.0};
        b.level = start;
        while (b.level > 0) {
            const double ab = s.level_alpha_bar(b.level);
            const std::vector<Image> eps{consistent_epsilon(b.targets[0], x0, ab)};
            b = ddim_step(b, eps, s);
        }
        EXPECT_LT(max_abs_diff(b.targets[0], x0), 1e-12);
    }
}

TEST(DdimStep, FinalLevelThrows) {
    LatentBatch b;
    b.targets = {Image(2, 2)};
    b.target_cameras = {test::test_camera(Vec3(0, 0, 3), 2)};
    b.target_times = {0.0};
    b.level = 0;
    const std::vector<Image> eps{Image(2, 2)};
    EXPECT_EQ(code_of([&] { ddim_step(b, eps, make_schedule()); }), Errc::out_of_range);
}

TEST(DdimUpdate, EqualLevelsNoOp) {
    auto z = random_field(16, 1);
    const auto before = z;
    const auto eps = random_field(16, 2);
    ddim_update<double>(z, eps, 0.5, 0.5);
    EXPECT_EQ(z, before);
}

TEST(DdimUpdate, ZeroEpsScalesX0) {
    const std::vector<double> x0{0.1, 0.5, 0.9, 0.0};
    const double a = 0.3;
    const double b = 0.8;
    std::vector<double> z(x0.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = std::sqrt(a) * x0[k];
    const std::vector<double> eps(x0.size(), 0.0);
    ddim_update<double>(z, eps, a, b);
    for (std::size_t k = 0; k < z.size(); ++k) EXPECT_NEAR(z[k], std::sqrt(b) * x0[k], 1e-15);
}

TEST(DdimUpdate, SinglePrecisionRecovery) {
    const NoiseSchedule s = make_schedule();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::normal_distribution<float> normal;
    std::vector<float> x0(256), z(256);
    for (float& v : x0) v = u(rng);
    for (float& v : z) v = normal(rng);
    for (int level = 25; level > 0; --level) {
        const double ab = s.level_alpha_bar(level);
        std::vector<float> eps(z.size());
        for (std::size_t k = 0; k < z.size(); ++k) {
            eps[k] = static_cast<float>((z[k] - std::sqrt(ab) * x0[k]) / std::sqrt(1.0 - ab));
        }
        ddim_update<float>(z, eps, ab, s.level_alpha_bar(level - 1));
    }
    for (std::size_t k = 0; k < z.size(); ++k) EXPECT_LE(std::abs(z[k] - x0[k]), 1e-4f);
}

TEST(Sample, ExactOracleReproducesGroundTruth) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene);
    const SampleRequest req{{o.cam}, {0.6}, SampleInit::pure_noise(), 42};
    const auto out = sample(oracle, o.cond, req, make_schedule(), kUnit);
    EXPECT_GE(metrics::psnr(out[0], toyworld::render(o.scene, o.cam, 0.6)), 60.0);
}

TEST(Sample, FromImagesAnyLevel) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene);
    const Image gt = toyworld::render(o.scene, o.cam, 0.6);
    const Image start = test::random_image(32, 32, 8);
    for (int k : {1, 5, 16, 25}) {
        const SampleRequest req{{o.cam}, {0.6}, SampleInit::from({start}, k), 7};
        const auto out = sample(oracle, o.cond, req, make_schedule(), kUnit);
        EXPECT_LT(max_abs_diff(out[0], gt), 1e-3) << "level " << k;
    }
}

TEST(Sample, StepCountFollowsInitLevel) {
    const Camera c = test::test_camera(Vec3(0, 0, 3), 8);
    const FixedTargetDenoiser inner({Image(8, 8, 0.5)});
    struct Counting final : Denoiser {
        const Denoiser& inner;
        mutable int calls = 0;
        explicit Counting(const Denoiser& d) : inner(d) {}
        std::vector<Image> predict(const LatentBatch& b, const ConditioningSet& cond) const override {
            ++calls;
            return inner.predict(b, cond);
        }
    };
    Counting counting(inner);
    sample(counting, {}, {{c}, {0.0}, SampleInit::pure_noise(), 1}, make_schedule(), kUnit);
    EXPECT_EQ(counting.calls, 25);
    for (int k : {1, 8, 16}) {
        counting.calls = 0;
        sample(counting, {}, {{c}, {0.0}, SampleInit::from({Image(8, 8)}, k), 1}, make_schedule(), kUnit);
        EXPECT_EQ(counting.calls, k);
    }
    counting.calls = 0;
    sample(counting, {}, {{c}, {0.0}, SampleInit::pure_noise(), 1}, make_schedule(), GuidanceConfig{});
    EXPECT_EQ(counting.calls, 75);
}

TEST(Sample, Deterministic) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene, {0.03, 0.05, 1});
    const SampleRequest req{{o.cam, test::test_camera(Vec3(2, 0.3, 2), 32)}, {0.6, 0.1}, {}, 5};
    EXPECT_EQ(sample(oracle, o.cond, req, make_schedule(), {}), sample(oracle, o.cond, req, make_schedule(), {}));
}

TEST(Sample, InitLevelOutOfRange) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene);
    const SampleRequest req{{o.cam}, {0.6}, SampleInit::from({Image(32, 32)}, 26), 1};
    EXPECT_EQ(code_of([&] { sample(oracle, o.cond, req, make_schedule(), kUnit); }), Errc::out_of_range);
    const SampleRequest bad{{o.cam}, {0.6}, SampleInit::from({Image(16, 16)}, 4), 1};
    EXPECT_EQ(code_of([&] { sample(oracle, o.cond, bad, make_schedule(), kUnit); }), Errc::shape_mismatch);
}

TEST(Oracle, DroppedTimesRenderFirstConditioningTime) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene);
    const SampleRequest req{{o.cam}, {0.9}, {}, 3};
    const auto out = sample(oracle, o.cond.with_times_dropped(), req, make_schedule(), kUnit);
    EXPECT_GE(metrics::psnr(out[0], toyworld::render(o.scene, o.cam, 0.2)), 60.0);
}

TEST(Oracle, UnconditionalGivesMeanColour) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene);
    const SampleRequest req{{o.cam}, {0.9}, {}, 3};
    const auto out = sample(oracle, o.cond.unconditional(), req, make_schedule(), kUnit);
    const Vec3 m = o.scene.mean_color();
    const Image expected = solid_image(32, 32, m[0], m[1], m[2]);
    EXPECT_LT(max_abs_diff(out[0], expected), 1e-6);
}

TEST(Oracle, CorruptedWindowsDifferAndMedianHelps) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene, {0.03, 0.05, 11});
    const Image gt = toyworld::render(o.scene, o.cam, 0.6);
    std::vector<Image> outs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SampleRequest req{{o.cam}, {0.6}, {}, seed};
        outs.push_back(sample(oracle, o.cond, req, make_schedule(), kUnit)[0]);
    }
    EXPECT_NE(outs[0], outs[1]);
    Image median(32, 32);
    double worst = 0.0;
    for (const Image& img : outs) worst = std::max(worst, l2_distance(img, gt));
    for (std::size_t k = 0; k < median.data.size(); ++k) {
        std::vector<double> v;
        for (const Image& img : outs) v.push_back(img.data[k]);
        std::nth_element(v.begin(), v.begin() + 2, v.end());
        median.data[k] = v[2];
    }
    EXPECT_LT(l2_distance(median, gt), worst);
}

TEST(Oracle, NoiseVarianceDecreasesMonotonically) {
    OracleSetup o;
    const OracleDenoiser oracle(o.scene);
    const NoiseSchedule s = make_schedule();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        LatentBatch b;
        b.targets = gaussian_noise(1, 32, 32, seed);
        b.target_cameras = {o.cam};
        b.target_times = {0.6};
        b.level = 25;
        double previous = std::numeric_limits<double>::infinity();
        while (b.level > 0) {
            b.alpha_bar = s.level_alpha_bar(b.level);
            const auto eps = oracle.predict(b, o.cond);
            const double sa = std::sqrt(b.alpha_bar);
            const double sn = std::sqrt(1.0 - b.alpha_bar);
            double mean = 0.0;
            double sq = 0.0;
            const auto& z = b.targets[0].data;
            for (std::size_t k = 0; k < z.size(); ++k) {
                const double x0 = std::clamp((z[k] - sn * eps[0].data[k]) / sa, kClipLow, kClipHigh);
                const double r = z[k] - sa * x0;
                mean += r;
                sq += r * r;
            }
            mean /= static_cast<double>(z.size());
            const double var = sq / static_cast<double>(z.size()) - mean * mean;
            EXPECT_LT(var, previous);
            previous = var;
            b = ddim_step(b, eps, s);
        }
    }
}

TEST(FixedTarget, RecoversTargets) {
    const std::vector<Image> x0{test::random_image(8, 8, 1), test::random_image(8, 8, 2)};
    const FixedTargetDenoiser d(x0);
    const Camera c = test::test_camera(Vec3(0, 0, 3), 8);
    const SampleRequest req{{c, c}, {0.0, 0.0}, {}, 4};
    const auto out = sample(d, ConditioningSet{}, req, make_schedule(), kUnit);
    for (int i = 0; i < 2; ++i) EXPECT_LT(max_abs_diff(out[i], x0[i]), 1e-10);
}

TEST(SmoothBasis, Orthonormal) {
    const auto b = smooth_basis(7, 5);
    ASSERT_EQ(b.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < b[i].size(); ++k) dot += b[i][k] * b[j][k];
            EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
        }
    }
}
