#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "mvgrid/trajectory.hpp"

using namespace mvgrid;
using namespace mvgrid::trajectory;
using test::code_of;

namespace {

std::vector<Camera> cameras_at(const std::vector<Vec3>& centers) {
    std::vector<Camera> cams;
    for (const Vec3& c : centers) cams.push_back(test::test_camera(c, 16, c + Vec3(0, 0, 1)));
    return cams;
}

// Independent greedy: full pairwise distance matrix, explicit scan.
std::vector<int> brute_force_fps(const std::vector<Vec3>& pts, int k) {
    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<double>> d(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < 3; ++a) s += (pts[i][a] - pts[j][a]) * (pts[i][a] - pts[j][a]);
            d[i][j] = std::sqrt(s);
        }
    }
    std::vector<int> picked{0};
    while (static_cast<int>(picked.size()) < k) {
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < n; ++i) {
            double m = std::numeric_limits<double>::infinity();
            for (int p : picked) m = std::min(m, d[i][p]);
            if (m > best_d) {
                best_d = m;
                best = i;
            }
        }
        picked.push_back(best);
    }
    return picked;
}

}  // namespace

TEST(Fps, Exhaustion) {
    const auto cams = cameras_at({{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {5, 5, 5}});
    const auto idx = farthest_point_sample(cams, 4);
    EXPECT_EQ(idx, (std::vector<int>{0, 3, 2, 1}));
}

TEST(Fps, LineTieBreak) {
    std::vector<Vec3> pts;
    for (int i = 0; i < 8; ++i) pts.emplace_back(i, 0, 0);
    EXPECT_EQ(farthest_point_sample(cameras_at(pts), 3), (std::vector<int>{0, 7, 3}));
}

TEST(Fps, DegenerateInput) {
    const auto cams = cameras_at({{1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
    EXPECT_EQ(distinct_center_count(cams), 1);
    EXPECT_EQ(code_of([&] { farthest_point_sample(cams, 2); }), Errc::degenerate_input);
    EXPECT_EQ(code_of([&] { farthest_point_sample(cams, 0); }), Errc::invalid_argument);
}

TEST(Fps, MatchesBruteForce) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 8;
        std::vector<Vec3> pts;
        for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
        const auto cams = cameras_at(pts);
        for (int k = 1; k <= n; ++k) EXPECT_EQ(farthest_point_sample(cams, k), brute_force_fps(pts, k));
    }
}

TEST(Fps, MinDistanceNonIncreasing) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 20; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
    const auto cams = cameras_at(pts);
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 2; k <= 20; ++k) {
        const auto idx = farthest_point_sample(cams, k);
        double m = std::numeric_limits<double>::infinity();
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < a; ++b) m = std::min(m, (pts[idx[a]] - pts[idx[b]]).norm());
        }
        EXPECT_LE(m, previous);
        previous = m;
    }
}

TEST(Stationary, Examples) {
    const Camera c = test::test_camera(Vec3(0, 0.5, 3));
    const std::vector<Camera> same(5, c);
    EXPECT_TRUE(is_stationary(same, 4.0));
    EXPECT_TRUE(is_stationary(std::vector<Camera>{c}, 4.0));
    PathParams p;
    p.radius = 1.0;
    p.count = 8;
    EXPECT_FALSE(is_stationary(make_path(PathKind::orbit, p), 4.0));
    // Pure rotation beyond one degree.
    const Camera turned = test::test_camera(Vec3(0, 0.5, 3), 32, Vec3(0.2, 0, 0));
    EXPECT_FALSE(is_stationary(std::vector<Camera>{c, turned}, 4.0));
}

TEST(Path, OrbitAzimuths) {
    PathParams p;
    p.count = 4;
    p.turns = 1.0;
    p.elevation_deg = 0.0;
    p.radius = 2.0;
    const auto cams = make_path(PathKind::orbit, p);
    ASSERT_EQ(cams.size(), 4u);
    for (int i = 0; i < 4; ++i) {
        const Vec3 c = cams[i].center();
        const double az = std::atan2(c.z(), c.x());
        double expected = i * std::numbers::pi / 2.0;
        if (expected > std::numbers::pi) expected -= 2.0 * std::numbers::pi;
        EXPECT_NEAR(std::remainder(az - expected, 2.0 * std::numbers::pi), 0.0, 1e-12);
    }
}

TEST(Path, OrbitGeometry) {
    PathParams p;
    p.center = Vec3(0.3, -0.2, 0.1);
    p.radius = 2.5;
    p.count = 12;
    p.elevation_deg = 20.0;
    for (const Camera& c : make_path(PathKind::orbit, p)) {
        c.validate();
        EXPECT_NEAR((c.center() - p.center).norm(), 2.5, 1e-12);
        const Vec3 to_center = p.center - c.center();
        const Vec3 off_axis = to_center - to_center.dot(c.forward()) * c.forward();
        EXPECT_LT(off_axis.norm(), 1e-9);
    }
}

TEST(Path, SpiralsAreValidAndDeterministic) {
    PathParams p;
    p.count = 10;
    for (PathKind kind : {PathKind::forward_spiral, PathKind::inout_spiral, PathKind::orbit}) {
        const auto a = make_path(kind, p);
        const auto b = make_path(kind, p);
        ASSERT_EQ(a.size(), 10u);
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i].validate();
            EXPECT_EQ(a[i], b[i]);
        }
    }
    const auto inout = make_path(PathKind::inout_spiral, p);
    double lo = 1e9;
    double hi = 0.0;
    for (const Camera& c : inout) {
        lo = std::min(lo, c.center().norm());
        hi = std::max(hi, c.center().norm());
    }
    EXPECT_GT(hi - lo, 0.5 * p.radius * p.spiral_amplitude);
}

TEST(Path, InvalidParams) {
    PathParams p;
    p.count = 0;
    EXPECT_EQ(code_of([&] { make_path(PathKind::orbit, p); }), Errc::invalid_argument);
    p.count = 4;
    p.radius = -1.0;
    EXPECT_EQ(code_of([&] { make_path(PathKind::orbit, p); }), Errc::invalid_argument);
}

TEST(Plan, AnchorsAndJsonRoundTrip) {
    PathParams p;
    p.count = 8;
    p.turns = 0.5;
    const auto inputs = make_path(PathKind::orbit, p);
    const TrajectoryPlan plan = make_plan(inputs, 4, PathKind::inout_spiral, p);
    plan.validate(8);
    EXPECT_EQ(plan.anchor_indices, farthest_point_sample(inputs, 4));
    EXPECT_EQ(plan.novel_cameras.size(), 8u);
    nlohmann::json j = plan;
    const TrajectoryPlan back = j.get<TrajectoryPlan>();
    EXPECT_EQ(back.kind, plan.kind);
    EXPECT_EQ(back.anchor_indices, plan.anchor_indices);
    ASSERT_EQ(back.novel_cameras.size(), plan.novel_cameras.size());
    for (std::size_t i = 0; i < back.novel_cameras.size(); ++i) {
        EXPECT_LT((back.novel_cameras[i].world_from_camera - plan.novel_cameras[i].world_from_camera)
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-12);
    }
    const TrajectoryPlan reuse = make_plan(inputs, 3, PathKind::reuse_input, p);
    EXPECT_EQ(reuse.novel_cameras.size(), 8u);
    EXPECT_EQ(path_kind_from_string(to_string(PathKind::forward_spiral)), PathKind::forward_spiral);
}
