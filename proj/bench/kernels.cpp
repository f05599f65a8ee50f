// Serial versus OpenMP versions of the heavy kernels.
#include "mmls/geodesic.hpp"
#include "mmls/mmls.hpp"
#include "mmls/resample.hpp"
#include "mmls/sampling_stats.hpp"
#include "mmls/synthetic.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace mmls;

namespace {

const PointCloud& raw_cloud() {
  static const PointCloud cloud = sample_sphere(2, 3, 1.0, 32000, 11).first;
  return cloud;
}

const PointCloud& sphere_cloud() {
  static const PointCloud cloud = farthest_point_subsample(raw_cloud(), 2000, 1);
  return cloud;
}

const ManifoldMLS& projector() {
  static const ManifoldMLS mls = [] {
    MMLSConfig cfg;
    cfg.intrinsic_dim = 2;
    cfg.k = 3;
    cfg.fill_distance = 3.0 * separation_radius(sphere_cloud());
    return ManifoldMLS(sphere_cloud(), cfg);
  }();
  return mls;
}

const PointCloud& queries() {
  static const PointCloud q = add_noise(sample_sphere(2, 3, 1.0, 200, 12).first, 1e-3, 13);
  return q;
}

void BM_ProjectBatchSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(projector().project_batch_serial(queries()));
}

void BM_ProjectBatchParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(projector().project_batch(queries()));
  state.counters["threads"] = omp_get_max_threads();
}

ResampleConfig resample_config() {
  ResampleConfig cfg;
  cfg.enlarging_factor = 2;
  cfg.seed = 3;
  cfg.skip_failures = true;
  return cfg;
}

const ManifoldMLS& small_projector() {
  static const ManifoldMLS mls = [] {
    MMLSConfig cfg;
    cfg.intrinsic_dim = 2;
    cfg.k = 3;
    const PointCloud cloud = farthest_point_subsample(raw_cloud(), 150, 2);
    cfg.fill_distance = 3.0 * separation_radius(cloud);
    return ManifoldMLS(cloud, cfg);
  }();
  return mls;
}

void BM_ResampleSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(resample_serial(small_projector(), resample_config()));
}

void BM_ResampleParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(resample(small_projector(), resample_config()));
}

// The serial graph builder is the brute-force oracle, so both brute-force variants are timed.
void BM_BuildGraphSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_graph_serial(sphere_cloud(), ConnectionRule::knn(24)));
}

void BM_BuildGraphParallel(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(build_graph(sphere_cloud(), ConnectionRule::knn(24), SearchMode::brute_force));
}

void BM_BuildGraphParallelKdTree(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(sphere_cloud(), ConnectionRule::knn(24)));
}

void BM_FarthestPointSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_subsample_serial(raw_cloud(), 500, 5));
}

void BM_FarthestPointParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(farthest_point_subsample(raw_cloud(), 500, 5));
}

}  // namespace

BENCHMARK(BM_ProjectBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProjectBatchParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResampleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResampleParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildGraphSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildGraphParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildGraphParallelKdTree)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FarthestPointSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FarthestPointParallel)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  // Build the shared fixtures up front so no timing includes them.
  projector();
  small_projector();
  queries();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
