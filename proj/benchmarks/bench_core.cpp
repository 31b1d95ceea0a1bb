#include <benchmark/benchmark.h>

#include <map>

#include "bifurcat/bifcoeffs.hpp"
#include "bifurcat/continuation.hpp"
#include "bifurcat/model.hpp"
#include "bifurcat/numdiff.hpp"
#include "bifurcat/steadystate.hpp"

using namespace bifurcat;

namespace {

ParamMap hepc_params() {
  return ParamMap(std::map<std::string, double>{
      {"R_star", 1.0}, {"T_max", 100.0}, {"b", 1.2}, {"c", 0.9}, {"d", 1.0},
      {"r_T", 3.0}, {"s", 50.0}, {"rho", 1.2712411908091648},
      {"r_I", 7.8759528849926541}, {"delta", 1.8260671508085102}});
}

ParamMap mart_params() {
  return ParamMap(std::map<std::string, double>{
      {"D", 10.0}, {"Lambda", 1.0}, {"beta", 29.440289146953166}, {"delta", 1.5},
      {"eta", 88.544158380651623}, {"gamma", 50.0}, {"mu", 0.1}, {"psi", 11.0},
      {"sigma", 0.02}, {"w", 1.0}});
}

void bm_rhs_eval(benchmark::State& state) {
  const ModelSystem& m = builtin_model("martcheva5d");
  const ParamMap p = mart_params();
  Vec x = m.dfe(p);
  x.array() += 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(m.rhs(x, p));
}
BENCHMARK(bm_rhs_eval);

void bm_jacobian(benchmark::State& state) {
  const ModelSystem& m = builtin_model("martcheva5d");
  const ParamMap p = mart_params();
  Vec x = m.dfe(p);
  x.array() += 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(jacobian(m, x, p));
}
BENCHMARK(bm_jacobian);

void bm_d3f(benchmark::State& state) {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = hepc_params();
  const Vec x0 = m.dfe(p);
  Vec u1(3), u2(3), u3(3);
  u1 << 1.0, 0.5, -0.25;
  u2 << -0.5, 1.0, 0.75;
  u3 << 0.25, -0.75, 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(d3f(m, x0, p, u1, u2, u3));
}
BENCHMARK(bm_d3f);

void bm_coefficients(benchmark::State& state) {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = hepc_params();
  for (auto _ : state) benchmark::DoNotOptimize(coefficients(m, p, "rho", "r_I"));
}
BENCHMARK(bm_coefficients);

void bm_quadratic_reduction(benchmark::State& state) {
  const ParamMap p = mart_params();
  for (auto _ : state) {
    auto red = martcheva_quadratic(p);
    benchmark::DoNotOptimize(red.real_roots());
  }
}
BENCHMARK(bm_quadratic_reduction);

void bm_enumerate_states(benchmark::State& state) {
  const ModelSystem& m = builtin_model("hepc3d");
  const ParamMap p = hepc_params();
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_states(m, p));
}
BENCHMARK(bm_enumerate_states);

void bm_short_trace(benchmark::State& state) {
  const ModelSystem& m = builtin_model("hepc3d");
  ParamMap p = hepc_params();
  p.set("r_I", p.at("r_I") - 0.0888);  // opens a genuine fold to march through
  const auto states = enumerate_states(m, p);
  const SteadyState start = states.back();
  TraceOptions opts;
  opts.alpha1_min = 0.5 * p.at("rho");
  opts.alpha1_max = 2.0 * p.at("rho");
  opts.max_steps = 200;
  for (auto _ : state)
    benchmark::DoNotOptimize(trace(m, p, "rho", start, -1, opts));
}
BENCHMARK(bm_short_trace);

}  // namespace

BENCHMARK_MAIN();
