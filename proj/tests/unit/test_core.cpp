#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "mvgrid/error.hpp"
#include "mvgrid/grid_io.hpp"
#include "mvgrid/rng.hpp"
#include "mvgrid/view_grid.hpp"

namespace fs = std::filesystem;
using namespace mvgrid;
using test::code_of;

namespace {

Camera identity_camera() {
    Camera c;
    c.fx = c.fy = 100.0;
    c.cx = c.cy = 64.0;
    c.width = c.height = 128;
    return c;
}

ViewGrid random_grid(int rows, int cols, int size, std::uint64_t seed) {
    std::vector<Camera> cams;
    for (int i = 0; i < rows; ++i) {
        const double a = 0.4 * i;
        cams.push_back(test::test_camera(Vec3(3.0 * std::cos(a), 0.5, 3.0 * std::sin(a)), size));
    }
    std::vector<double> raw;
    for (int j = 0; j < cols; ++j) raw.push_back(10.0 + 2.5 * j);
    ViewGrid g(cams, raw, size, size);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            g.set(i, j, quantize16(test::random_image(size, size, seed + i * 97 + j)),
                  (i + j) % 2 ? FillState::generated : FillState::input);
        }
    }
    return g;
}

}  // namespace

TEST(Camera, OpticalAxisProjectsToPrincipalPoint) {
    const Camera c = identity_camera();
    const Projection p = project(Vec3(0, 0, 2.5), c);
    EXPECT_DOUBLE_EQ(p.u, 64.0);
    EXPECT_DOUBLE_EQ(p.v, 64.0);
    EXPECT_DOUBLE_EQ(p.depth, 2.5);
}

TEST(Camera, HandEvaluatedProjection) {
    const Projection p = project(Vec3(0.5, 0, 1), identity_camera());
    EXPECT_DOUBLE_EQ(p.u, 114.0);
    EXPECT_DOUBLE_EQ(p.v, 64.0);
    EXPECT_DOUBLE_EQ(p.depth, 1.0);
}

TEST(Camera, ZeroDepthIsBehindCamera) {
    EXPECT_EQ(code_of([] { project(Vec3(0.3, -0.2, 0.0), identity_camera()); }), Errc::behind_camera);
    EXPECT_EQ(code_of([] { project(Vec3(0, 0, -1), identity_camera()); }), Errc::behind_camera);
}

TEST(Camera, UnprojectInvertsProject) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Camera c = test::test_camera(Vec3(3 * u(rng), 2 * u(rng), 3 + u(rng)), 64, Vec3(u(rng), u(rng), 0));
        const Vec3 p(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng));
        const Projection pr = project(p, c);
        EXPECT_LT((unproject(pr.u, pr.v, pr.depth, c) - p).norm(), 1e-9);
    }
}

TEST(Camera, LookAtIsRigidAndFacesTarget) {
    const Camera c = test::test_camera(Vec3(2, 1, -3));
    c.validate();
    const Mat3 r = c.rotation();
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
    EXPECT_LT((c.forward() - (-c.center()).normalized()).norm(), 1e-12);
}

TEST(Camera, ValidateRejectsBadIntrinsics) {
    Camera c = identity_camera();
    c.fx = 0;
    EXPECT_EQ(code_of([&] { c.validate(); }), Errc::invalid_argument);
    c = identity_camera();
    c.cx = 128;
    EXPECT_EQ(code_of([&] { c.validate(); }), Errc::invalid_argument);
    c = identity_camera();
    c.world_from_camera(0, 0) = 2.0;
    EXPECT_EQ(code_of([&] { c.validate(); }), Errc::invalid_argument);
}

TEST(NormalizeTimes, Examples) {
    EXPECT_EQ(normalize_times(std::vector<double>{5}), std::vector<double>{0.0});
    const auto t = normalize_times(std::vector<double>{10, 20, 40});
    ASSERT_EQ(t.size(), 3u);
    EXPECT_DOUBLE_EQ(t[0], 0.0);
    EXPECT_NEAR(t[1], 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(t[2], 1.0);
    EXPECT_EQ(normalize_times(std::vector<double>{3, 3, 3}), (std::vector<double>{0, 0, 0}));
}

TEST(NormalizeTimes, DecreasingIsOrderingError) {
    EXPECT_EQ(code_of([] { normalize_times(std::vector<double>{1, 3, 2}); }), Errc::ordering);
}

TEST(NormalizeTimes, Idempotent) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> raw{u(rng)};
        for (int i = 0; i < 9; ++i) raw.push_back(raw.back() + u(rng));
        const auto once = normalize_times(raw);
        const auto twice = normalize_times(once);
        for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(once[i], twice[i], 1e-15);
    }
}

TEST(ViewGrid, InvariantsEnforced) {
    const Camera a = test::test_camera(Vec3(0, 0, 3));
    const Camera b = test::test_camera(Vec3(3, 0, 0));
    EXPECT_EQ(code_of([&] { ViewGrid({a, a}, {0.0, 1.0}, 32, 32); }), Errc::invalid_argument);
    EXPECT_EQ(code_of([&] { ViewGrid({a, b}, {0.0, 0.0}, {0.0, 0.0}, 32, 32); }), Errc::ordering);
    EXPECT_EQ(code_of([&] { ViewGrid({a, b}, {0.0, 1.0}, 16, 16); }), Errc::shape_mismatch);
    ViewGrid g({a, b}, {0.0, 1.0}, 32, 32);
    EXPECT_FALSE(g.complete());
    EXPECT_EQ(code_of([&] { g.image(0, 0); }), Errc::missing_cell);
    EXPECT_EQ(code_of([&] { g.set(0, 0, Image(8, 8), FillState::input); }), Errc::shape_mismatch);
    EXPECT_EQ(code_of([&] { g.set(2, 0, Image(32, 32), FillState::input); }), Errc::out_of_range);
}

TEST(ViewGrid, VideoRoundTrip) {
    const Camera a = test::test_camera(Vec3(0, 0, 3));
    const Camera b = test::test_camera(Vec3(3, 0, 0));
    std::vector<View> frames{{Image(32, 32, 0.1), a, 0.0}, {Image(32, 32, 0.2), b, 0.5}, {Image(32, 32, 0.3), a, 1.0}};
    const ViewGrid g = video_to_grid(frames, std::vector<double>{0, 1, 2});
    EXPECT_EQ(g.rows(), 2);
    EXPECT_EQ(g.cols(), 3);
    EXPECT_EQ(g.fill(1, 0), FillState::empty);
    const auto back = grid_to_frames(g);
    ASSERT_EQ(back.size(), 3u);
    for (int j = 0; j < 3; ++j) {
        EXPECT_EQ(back[j].view.image, frames[j].image);
        EXPECT_EQ(back[j].view.camera, frames[j].camera);
        EXPECT_EQ(back[j].provenance, FillState::input);
    }
}

TEST(GridIo, RoundTripIsExact) {
    test::TempDir dir("gridio");
    const ViewGrid g = random_grid(2, 2, 16, 5);
    save_grid(g, dir.path() / "g");
    const ViewGrid back = load_grid(dir.path() / "g");
    ASSERT_EQ(back.rows(), 2);
    ASSERT_EQ(back.cols(), 2);
    for (int i = 0; i < 2; ++i) {
        EXPECT_LT((back.camera(i).world_from_camera - g.camera(i).world_from_camera).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(back.camera(i).fx, g.camera(i).fx, 1e-12);
        for (int j = 0; j < 2; ++j) {
            EXPECT_EQ(back.image(i, j), g.image(i, j));
            EXPECT_EQ(back.fill(i, j), g.fill(i, j));
        }
    }
    for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(back.time(j), g.time(j), 1e-12);
        EXPECT_NEAR(back.raw_times()[j], g.raw_times()[j], 1e-12);
    }
}

TEST(GridIo, EmptyCellsAreNotWritten) {
    test::TempDir dir("gridio_empty");
    ViewGrid g = random_grid(2, 3, 16, 9);
    g.clear(1, 2);
    save_grid(g, dir.path());
    EXPECT_FALSE(fs::exists(cell_path(dir.path(), 1, 2)));
    const ViewGrid back = load_grid(dir.path());
    EXPECT_EQ(back.fill(1, 2), FillState::empty);
    EXPECT_EQ(back.image(0, 2), g.image(0, 2));
}

TEST(GridIo, MissingCellFileIsReported) {
    test::TempDir dir("gridio_missing");
    save_grid(random_grid(2, 2, 16, 1), dir.path());
    fs::remove(cell_path(dir.path(), 1, 0));
    EXPECT_EQ(code_of([&] { load_grid(dir.path()); }), Errc::missing_cell);
}

TEST(GridIo, DirectoryLayout) {
    test::TempDir dir("gridio_layout");
    save_grid(random_grid(13, 8, 8, 2), dir.path());
    EXPECT_TRUE(fs::exists(dir.path() / "manifest.json"));
    int rows = 0;
    int images = 0;
    for (const auto& entry : fs::directory_iterator(dir.path())) {
        if (!entry.is_directory()) continue;
        ++rows;
        for (const auto& f : fs::directory_iterator(entry.path())) images += f.path().extension() == ".png";
    }
    EXPECT_EQ(rows, 13);
    EXPECT_EQ(images, 13 * 8);
    EXPECT_TRUE(fs::exists(dir.path() / "cam012" / "t0007.png"));
}

TEST(Image, Png16RoundTripOnLattice) {
    test::TempDir dir("png");
    const Image img = quantize16(test::random_image(7, 5, 4));
    write_png16(dir.path() / "a.png", img);
    EXPECT_EQ(read_png16(dir.path() / "a.png"), img);
}

TEST(Rng, DeriveSeedIsOrderSensitive) {
    EXPECT_EQ(derive_seed({1, 2, 3}), derive_seed({1, 2, 3}));
    EXPECT_NE(derive_seed({1, 2, 3}), derive_seed({3, 2, 1}));
    EXPECT_NE(derive_seed({1, 2}), derive_seed({1, 2, 0}));
}
