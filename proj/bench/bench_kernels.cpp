#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "solartb/experiment.hpp"
#include "solartb/field.hpp"

using namespace solartb;

namespace {

std::vector<FieldPoint> grid_points(const FieldModel& m, int n) {
  const auto axis = grid_axis(m.geometry().test_area_mm, n);
  std::vector<FieldPoint> pts;
  for (double y : axis) {
    for (double x : axis) pts.push_back({x, y});
  }
  return pts;
}

template <auto Kernel>
void field_kernel(benchmark::State& state) {
  const FieldModel m{ChamberGeometry{}};
  const auto pts = grid_points(m, static_cast<int>(state.range(0)));
  std::vector<double> out(pts.size());
  for (auto _ : state) {
    Kernel(m.sources(), m.height_mm(), pts, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size() * m.sources().size()));
}

template <auto Batch>
void paired_sti(benchmark::State& state) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(state.range(0)));
  std::iota(seeds.begin(), seeds.end(), 1);
  const SystemConfig cfg;
  for (auto _ : state) {
    auto r = Batch(cfg, StiOptions{}, seeds);
    benchmark::DoNotOptimize(r.data());
  }
}

}  // namespace

BENCHMARK(field_kernel<kernels::field_serial>)->Name("field_serial")->Arg(8)->Arg(32)->Arg(64);
BENCHMARK(field_kernel<kernels::field_omp>)->Name("field_omp")->Arg(8)->Arg(32)->Arg(64)->UseRealTime();
BENCHMARK(paired_sti<paired_sti_serial>)->Name("paired_sti_serial")->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(paired_sti<paired_sti_omp>)->Name("paired_sti_omp")->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
