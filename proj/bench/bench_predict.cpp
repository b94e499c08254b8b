// OpenMP predict() against the serial reference path.

#include "sensi/locfit.hpp"
#include "sensi/models.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

struct Setup
{
  sensi::RegressionSample sample;
  std::vector<double> xs;
};

Setup
make_setup(std::size_t n)
{
  Setup s;
  s.sample = sensi::hetero_sine().draw(n, 1);
  s.xs = sensi::hetero_sine().draw_inputs(2000, 2);
  return s;
}

void
BM_PredictParallel(benchmark::State& state)
{
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  const sensi::LocalSmoother smoother(s.sample.x, 1, sensi::KernelSpec{});
  for (auto _ : state)
    benchmark::DoNotOptimize(smoother.predict(s.sample.y, s.xs, 0.05));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.xs.size()));
}

void
BM_PredictSerial(benchmark::State& state)
{
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  const sensi::LocalSmoother smoother(s.sample.x, 1, sensi::KernelSpec{});
  for (auto _ : state)
    benchmark::DoNotOptimize(smoother.predict_serial(s.sample.y, s.xs, 0.05));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(s.xs.size()));
}

void
BM_LeaveOneOutParallel(benchmark::State& state)
{
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  const sensi::LocalSmoother smoother(s.sample.x, 1, sensi::KernelSpec{});
  for (auto _ : state)
    benchmark::DoNotOptimize(smoother.predict_leave_one_out(s.sample.y, 0.05));
}

void
BM_LeaveOneOutSerial(benchmark::State& state)
{
  const auto s = make_setup(static_cast<std::size_t>(state.range(0)));
  const sensi::LocalSmoother smoother(s.sample.x, 1, sensi::KernelSpec{});
  for (auto _ : state)
    benchmark::DoNotOptimize(smoother.predict_leave_one_out_serial(s.sample.y, 0.05));
}

} // namespace

BENCHMARK(BM_PredictParallel)->Arg(500)->Arg(4000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PredictSerial)->Arg(500)->Arg(4000)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LeaveOneOutParallel)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LeaveOneOutSerial)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
