#include <benchmark/benchmark.h>

#include "bwlab/besselsim.hpp"
#include "bwlab/classtest.hpp"
#include "bwlab/lab/rng.hpp"
#include "bwlab/localtime.hpp"
#include "bwlab/specfun.hpp"
#include "bwlab/walklaw.hpp"
#include "bwlab/walksim.hpp"

using namespace bwlab;

static void BM_BesselI(benchmark::State& st) {
  double x = 0.3;
  for (auto _ : st) {
    benchmark::DoNotOptimize(specfun::bessel_i(1.3, x));
    x = x < 40.0 ? x + 0.7 : 0.3;
  }
}
BENCHMARK(BM_BesselI);

static void BM_BesselK(benchmark::State& st) {
  const double nu = static_cast<double>(st.range(0)) / 4.0;
  double x = 0.3;
  for (auto _ : st) {
    benchmark::DoNotOptimize(specfun::bessel_k(nu, x));
    x = x < 40.0 ? x + 0.7 : 0.3;
  }
}
BENCHMARK(BM_BesselK)->Arg(3)->Arg(4);  // fractional and integer order

static void BM_WalkSteps(benchmark::State& st) {
  walklaw::UpProbabilityTable e(walklaw::WalkLaw::bessel(0.5));
  lab::RngStream rng(1, 0);
  const auto n = static_cast<std::uint64_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(walksim::walk_position(e, n, rng));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_WalkSteps)->Arg(1 << 16);

static void BM_ExactStep(benchmark::State& st) {
  lab::RngStream rng(2, 0);
  double y = 1.0;
  for (auto _ : st) {
    y = besselsim::exact_step(0.5, y, 1e-3, rng);
    benchmark::DoNotOptimize(y);
  }
}
BENCHMARK(BM_ExactStep);

static void BM_SampleExit(benchmark::State& st) {
  const specfun::BesselOrder order(0.5);
  const specfun::Interval iv(4.0, 5.0, 6.0);
  const besselsim::Scheme scheme;
  lab::RngStream rng(3, 0);
  for (auto _ : st) benchmark::DoNotOptimize(besselsim::sample_exit(order, iv, scheme, rng).time);
}
BENCHMARK(BM_SampleExit);

static void BM_JointLocalTime(benchmark::State& st) {
  const auto law = localtime::excursion_law(1.0, 20);
  lab::RngStream rng(4, 0);
  for (auto _ : st) benchmark::DoNotOptimize(localtime::sample_joint_local_time(law, rng));
}
BENCHMARK(BM_JointLocalTime);

static void BM_ClassTest(benchmark::State& st) {
  const auto f = classtest::BoundaryFunction::sqrt_loglog(2.5);
  for (auto _ : st)
    benchmark::DoNotOptimize(classtest::evaluate_test(classtest::TestId::BesselUpper, f, 0.5).verdict);
}
BENCHMARK(BM_ClassTest)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
