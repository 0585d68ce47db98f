#include <benchmark/benchmark.h>

#include <vector>

#include "tailsim/experiments.hpp"
#include "tailsim/grasp.hpp"
#include "tailsim/statics.hpp"

using namespace tailsim;

namespace {

void BM_EnergyAndGradient(benchmark::State& state) {
  const auto model = default_tail();
  std::vector<double> q(model.joint_count(), 0.05);
  const std::vector<WireInput> in{WireInput::pull(3, 0.02), WireInput::pull(2, 0.01)};
  GraspScene scene;
  scene.object = make_circle(0.09, Vec2(0.6, 0.05));
  for (auto _ : state) {
    benchmark::DoNotOptimize(total_energy(model, q, in, &scene));
    benchmark::DoNotOptimize(energy_gradient(model, q, in, &scene));
  }
}
BENCHMARK(BM_EnergyAndGradient);

void BM_FreeSpaceSolve(benchmark::State& state) {
  const auto model = default_tail();
  const std::vector<double> q0(model.joint_count(), 0.0);
  const std::vector<WireInput> in{WireInput::pull(3, 1e-3 * static_cast<double>(state.range(0)))};
  for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium(model, in, nullptr, q0));
}
BENCHMARK(BM_FreeSpaceSolve)->Arg(5)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

// One ramp step of an interactive session: small δ change from a solved state.
void BM_WarmStartStep(benchmark::State& state) {
  const auto model = default_tail();
  const std::vector<double> zero(model.joint_count(), 0.0);
  const std::vector<WireInput> a{WireInput::pull(3, 0.030)};
  const std::vector<WireInput> b{WireInput::pull(3, 0.032)};
  const auto start = solve_equilibrium(model, a, nullptr, zero).q_star;
  for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium(model, b, nullptr, start));
}
BENCHMARK(BM_WarmStartStep)->Unit(benchmark::kMillisecond);

void BM_GraspAndPull(benchmark::State& state) {
  const auto model = with_kappa(default_tail(), 0.2);
  const auto file = default_sweep_scene();
  GraspOptions go;
  go.tension_limit = file.grasp_tension_limit;
  const std::vector<double> q0(model.joint_count(), 0.0);
  for (auto _ : state) {
    const auto grasp = solve_grasp(model, file.grasp_wires, file.scene, q0, go);
    benchmark::DoNotOptimize(pull_out_force(model, grasp.clamped_inputs, file.scene, grasp.equilibrium.q_star,
                                            file.direction, file.pull));
  }
}
BENCHMARK(BM_GraspAndPull)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
