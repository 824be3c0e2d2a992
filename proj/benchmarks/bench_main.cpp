#include <benchmark/benchmark.h>

#include <surfeit/calculus.hpp>
#include <surfeit/dn_models.hpp>

namespace {

void BM_DnMobiusAssemble(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(surfeit::dn_mobius(2.0, n));
  }
}
BENCHMARK(BM_DnMobiusAssemble)->Arg(128)->Arg(512);

void BM_OpNorm(benchmark::State& state) {
  const auto dn = surfeit::dn_annulus(0.5, static_cast<int>(state.range(0)));
  const auto diff = dn - dn.scaled(0.99);
  for (auto _ : state) {
    benchmark::DoNotOptimize(surfeit::op_norm_h1_l2(diff, 16));
  }
}
BENCHMARK(BM_OpNorm)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
