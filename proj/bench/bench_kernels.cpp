// Serial reference vs OpenMP kernels on a representative grid.

#include <benchmark/benchmark.h>

#include "spin7/bvp.hpp"
#include "spin7/nonlinear.hpp"

using namespace spin7;

namespace {

FlatCayleyDomain bench_domain() { return FlatCayleyDomain({12, 12, 12, 12}, {1, 1, 1, 1}); }

NormalField bench_field(const FlatCayleyDomain& dom) {
  NormalField s(dom.num_nodes());
  for (std::int64_t id = 0; id < dom.num_nodes(); ++id) {
    std::array<double, 4> x = dom.position(id);
    for (int a = 0; a < 4; ++a)
      s.at(id, a) = 0.01 * std::sin(6.283 * x[a % 3]) * (1.0 + x[3]);
  }
  return s;
}

void BM_apply_D_serial(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  NormalField s = bench_field(dom);
  for (auto _ : state) benchmark::DoNotOptimize(apply_D_serial(dom, s));
}
BENCHMARK(BM_apply_D_serial)->Unit(benchmark::kMillisecond);

void BM_apply_D_parallel(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  NormalField s = bench_field(dom);
  for (auto _ : state) benchmark::DoNotOptimize(apply_D(dom, s));
}
BENCHMARK(BM_apply_D_parallel)->Unit(benchmark::kMillisecond);

void BM_dstar_d_serial(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  NormalField s = bench_field(dom);
  for (auto _ : state) benchmark::DoNotOptimize(apply_DstarD_serial(dom, s));
}
BENCHMARK(BM_dstar_d_serial)->Unit(benchmark::kMillisecond);

void BM_dstar_d_parallel(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  NormalField s = bench_field(dom);
  for (auto _ : state) benchmark::DoNotOptimize(apply_DstarD(dom, s));
}
BENCHMARK(BM_dstar_d_parallel)->Unit(benchmark::kMillisecond);

void BM_cayley_residual_serial(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  GraphField g(dom, bench_field(dom));
  for (auto _ : state) benchmark::DoNotOptimize(cayley_residual_serial(g));
}
BENCHMARK(BM_cayley_residual_serial)->Unit(benchmark::kMillisecond);

void BM_cayley_residual_parallel(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  GraphField g(dom, bench_field(dom));
  for (auto _ : state) benchmark::DoNotOptimize(cayley_residual(g));
}
BENCHMARK(BM_cayley_residual_parallel)->Unit(benchmark::kMillisecond);

void BM_volume_flux_serial(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  GraphField g(dom, bench_field(dom));
  for (auto _ : state) benchmark::DoNotOptimize(volume_and_flux_serial(g));
}
BENCHMARK(BM_volume_flux_serial)->Unit(benchmark::kMillisecond);

void BM_volume_flux_parallel(benchmark::State& state) {
  FlatCayleyDomain dom = bench_domain();
  GraphField g(dom, bench_field(dom));
  for (auto _ : state) benchmark::DoNotOptimize(volume_and_flux(g));
}
BENCHMARK(BM_volume_flux_parallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
