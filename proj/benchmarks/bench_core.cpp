#include <benchmark/benchmark.h>

#include "dreid/covdesc.hpp"
#include "dreid/geometry.hpp"
#include "dreid/spd.hpp"
#include "dreid/synth.hpp"
#include "dreid/transfer.hpp"

namespace {

const dreid::SyntheticBody& sample_body() {
  static const dreid::SyntheticBody body = [] {
    dreid::SyntheticBodySpec spec;
    spec.noise_sigma = 2.0;
    return dreid::generate_body(spec, 1);
  }();
  return body;
}

void BM_EstimateNormals(benchmark::State& state) {
  const auto& body = sample_body();
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(dreid::estimate_normals(body.cloud, k));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(body.cloud.size()));
}
BENCHMARK(BM_EstimateNormals)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_ExtractDvcov(benchmark::State& state) {
  const auto& body = sample_body();
  const auto cloud = dreid::estimate_normals(body.cloud);
  dreid::DescriptorParams params;
  params.rows = static_cast<int>(state.range(0));
  params.cols = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(dreid::extract_dvcov(cloud, body.joints, params));
}
BENCHMARK(BM_ExtractDvcov)->Args({6, 2})->Args({8, 4})->Unit(benchmark::kMicrosecond);

void BM_GeodesicDistance(benchmark::State& state) {
  auto rng = dreid::make_engine(3);
  const dreid::Mat6 a = dreid::random_spd(rng);
  const dreid::Mat6 b = dreid::random_spd(rng);
  for (auto _ : state) benchmark::DoNotOptimize(dreid::geodesic_distance(a, b));
}
BENCHMARK(BM_GeodesicDistance);

void BM_DvcovDistance(benchmark::State& state) {
  const auto& body = sample_body();
  const auto d1 = dreid::extract_dvcov(dreid::estimate_normals(body.cloud), body.joints);
  const auto other = dreid::generate_body({}, 2);
  const auto d2 = dreid::extract_dvcov(dreid::estimate_normals(other.cloud), other.joints);
  for (auto _ : state) benchmark::DoNotOptimize(dreid::dvcov_distance(d1, d2));
}
BENCHMARK(BM_DvcovDistance)->Unit(benchmark::kMicrosecond);

void BM_FitTransfer(benchmark::State& state) {
  const int classes = static_cast<int>(state.range(0));
  const auto aux = dreid::generate_paired_features(classes, 8, 1);
  const auto kc = dreid::default_kernel_config(aux);
  dreid::TransferHyperParams hp;
  hp.m = 2 * (classes - 1);
  for (auto _ : state) benchmark::DoNotOptimize(dreid::fit_transfer(aux, hp, kc));
  state.SetLabel("N=" + std::to_string(aux.size()));
}
BENCHMARK(BM_FitTransfer)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
