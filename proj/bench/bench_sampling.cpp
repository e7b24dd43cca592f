// Serial versus OpenMP grid sampling on the spatial arm family.

#include <benchmark/benchmark.h>

#include <random>

#include "ikform/sampling.hpp"

namespace {

using namespace ikform;

IKProblem make_problem(int extra) {
  IKProblem p;
  const auto arm = scaled_arm(extra);
  p.chain = arm;
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  std::vector<double> q(arm.num_joints());
  for (auto& v : q) v = u(rng);
  p.target = arm.forward(std::span<const double>(q));
  p.cost = CostSpec::identity(arm.num_joints());
  return p;
}

template <SampleReport (*Sampler)(const IKProblem&, const SamplePlan&)>
void run(benchmark::State& state) {
  const IKProblem problem = make_problem(static_cast<int>(state.range(0)));
  const SamplePlan plan = SamplePlan::from_budget(*make_ik_map(problem), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(Sampler(problem, plan));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(plan.budget()));
  state.counters["threads"] = Sampler == sample_ik ? worker_threads() : 1;
}

void arguments(benchmark::internal::Benchmark* b) {
  for (int extra : {0, 4}) b->Args({extra, 512})->Args({extra, 8192});
}

BENCHMARK(run<sample_ik_serial>)->Name("sample_ik_serial")->Apply(arguments)->Unit(benchmark::kMillisecond);
BENCHMARK(run<sample_ik>)->Name("sample_ik_parallel")->Apply(arguments)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
