#include <random>

#include <benchmark/benchmark.h>

#include "mvgrid/curation.hpp"
#include "mvgrid/grid_sampler.hpp"
#include "mvgrid/optimize.hpp"
#include "mvgrid/oracle.hpp"
#include "mvgrid/ssim.hpp"
#include "mvgrid/trajectory.hpp"

using namespace mvgrid;

namespace {

Camera bench_camera(int size) { return Camera::look_at_fov(Vec3(0.4, 0.8, 2.8), Vec3::Zero(), 50.0, size, size); }

recon4d::GaussianCloud bench_cloud(int n) {
    return recon4d::random_cloud(n, recon4d::Aabb{}, 0.04, 0.3, 1);
}

void BM_RasterizeForward(benchmark::State& state) {
    const auto cloud = bench_cloud(static_cast<int>(state.range(0)));
    const auto scales = cloud.scales();
    const auto opacities = cloud.opacities();
    const Camera cam = bench_camera(64);
    for (auto _ : state) {
        benchmark::DoNotOptimize(recon4d::rasterize(cloud.positions, scales, opacities, cloud.colors, cam));
    }
}
BENCHMARK(BM_RasterizeForward)->Arg(1000)->Arg(4000);

void BM_RasterizeBackward(benchmark::State& state) {
    const auto cloud = bench_cloud(static_cast<int>(state.range(0)));
    const auto scales = cloud.scales();
    const auto opacities = cloud.opacities();
    const Camera cam = bench_camera(64);
    const Image d_image(64, 64, 1e-3);
    for (auto _ : state) {
        const recon4d::Rasterization r(cloud.positions, scales, opacities, cloud.colors, cam);
        benchmark::DoNotOptimize(r.backward(d_image));
    }
}
BENCHMARK(BM_RasterizeBackward)->Arg(1000)->Arg(4000);

void BM_RenderModel(benchmark::State& state) {
    const auto cloud = bench_cloud(2000);
    recon4d::DeformationField field(recon4d::Aabb{}, 32, 8, 2);
    for (double& h : field.head()) h = 0.01;
    const Camera cam = bench_camera(64);
    for (auto _ : state) benchmark::DoNotOptimize(recon4d::render_model(cloud, field, cam, 0.5));
}
BENCHMARK(BM_RenderModel);

void BM_ToyworldRender(benchmark::State& state) {
    const auto scene = toyworld::generate_scene(1, 3);
    const Camera cam = bench_camera(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(toyworld::render(scene, cam, 0.3));
}
BENCHMARK(BM_ToyworldRender)->Arg(32)->Arg(64);

void BM_OracleSample(benchmark::State& state) {
    const auto scene = toyworld::generate_scene(1, 3);
    const Camera cam = bench_camera(32);
    const diffusion::OracleDenoiser oracle(scene, {0.03, 0.05, 1});
    diffusion::ConditioningSet cond;
    cond.views = {View{toyworld::render(scene, cam, 0.0), cam, 0.0}};
    const diffusion::SampleRequest req{{bench_camera(32)}, {0.5}, diffusion::SampleInit::pure_noise(), 3};
    const auto schedule = diffusion::make_schedule();
    for (auto _ : state) benchmark::DoNotOptimize(diffusion::sample(oracle, cond, req, schedule, {1.0, 1.0}));
}
BENCHMARK(BM_OracleSample)->Unit(benchmark::kMillisecond);

void BM_SsimPlane(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> a(n * n), b(n * n);
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(ssim_plane(a, b, n, n, state.range(1) != 0));
}
BENCHMARK(BM_SsimPlane)->Args({64, 0})->Args({64, 1});

void BM_MixtureDraw(benchmark::State& state) {
    curation::MixtureSampler sampler(curation::MixtureSpec::standard(), 5);
    for (auto _ : state) benchmark::DoNotOptimize(sampler.next());
}
BENCHMARK(BM_MixtureDraw);

}  // namespace

BENCHMARK_MAIN();
