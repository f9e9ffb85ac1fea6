// Parallel kernels against their serial reference versions on one fixture.
#include "jpil/reference.hpp"
#include "jpil/synthbench.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace jpil;

namespace {

struct Fixture {
  Scene scene;
  PointCloud cloud;
  KeypointSet features;
  SphericalRender render;
  std::vector<Correspondence3d2d> corrs;
  OrientationENU pose{1.0, -2.0, 30.0};
  Point3 camera;

  Fixture() : scene(generate_scene(SceneSpec{})) {
    const double x = scene.girder_x[1];
    BoundingBox box{{x - 1.5, 12.0, 1.5}, {x + 1.5, 16.0, 4.0}};
    cloud = sample_mesh(clip_mesh(scene.mesh, box), 100.0, 1);
    features.keypoints = detect_keypoints(cloud, KeypointParams{});
    features.descriptors = compute_tbsc_batch(cloud, features.keypoints, 0.6);
    camera = {x + 2.0, 14.0, 2.5};
    render = render_spherical(Bvh(scene.mesh), camera, pose, RenderParams{256, 128});

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    const Matrix3 rt = pose.rotation().transpose();
    for (int k = 0; k < 200; ++k) {
      Correspondence3d2d c;
      c.point = camera + Vector3(u(rng), u(rng), 0.5 * u(rng));
      c.pixel = ray_to_pixel(rt * (c.point - camera), 1280, 640);
      if (k % 10 < 3) c.pixel = {640.0 + 80.0 * u(rng), 320.0 + 40.0 * u(rng)};
      corrs.push_back(c);
    }
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Keypoints_Parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(detect_keypoints(f.cloud, KeypointParams{}));
  st.counters["points"] = static_cast<double>(f.cloud.size());
}
void BM_Keypoints_Serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(serial::detect_keypoints(f.cloud, KeypointParams{}));
}

void BM_Descriptors_Parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(compute_tbsc_batch(f.cloud, f.features.keypoints, 0.6));
}
void BM_Descriptors_Serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(serial::compute_tbsc_batch(f.cloud, f.features.keypoints, 0.6));
  }
}

void BM_Match_Parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(match_descriptors(f.features, f.features, 0.25));
}
void BM_Match_Serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(serial::match_descriptors(f.features, f.features, 0.25));
}

void BM_Render_Bvh(benchmark::State& st) {
  const auto& f = fixture();
  const Bvh bvh(f.scene.mesh);
  for (auto _ : st) {
    benchmark::DoNotOptimize(render_spherical(bvh, f.camera, f.pose, RenderParams{256, 128}));
  }
}
void BM_Render_Serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        serial::render_spherical(f.scene.mesh, f.camera, f.pose, RenderParams{256, 128}));
  }
}

void BM_Sigma_Parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(sigma_map(f.render, 2));
}
void BM_Sigma_Serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(serial::sigma_map(f.render, 2));
}

void BM_Ransac_Parallel(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(ransac_snp(f.corrs, f.pose, 4.0, f.camera + Vector3(0.3, 0.2, 0.0)));
  }
}
void BM_Ransac_Serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        serial::ransac_snp(f.corrs, f.pose, 4.0, f.camera + Vector3(0.3, 0.2, 0.0)));
  }
}

}  // namespace

BENCHMARK(BM_Keypoints_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Keypoints_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Descriptors_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Descriptors_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Match_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Match_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render_Bvh)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Render_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sigma_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sigma_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ransac_Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ransac_Serial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
