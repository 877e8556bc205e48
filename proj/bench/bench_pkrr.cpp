/*
 * Copyright 2026 The pkrr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Serial reference solvers against the spectral solvers, and the Monte Carlo
// driver on one thread against all cores.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "pkrr/dgp.hpp"
#include "pkrr/hetero.hpp"
#include "pkrr/homo.hpp"
#include "pkrr/montecarlo.hpp"
#include "pkrr/reference.hpp"

using namespace pkrr;

namespace {

PanelData panel(std::size_t n, std::size_t t) {
  DgpSpec d;
  d.design = Design::HomoBeta;
  d.n = n;
  d.t = t;
  d.seed = 5;
  return generate(d).panel;
}

const KernelSpec kGauss = KernelSpec::gaussian(1.0);

void BM_HeteroGcvReference(benchmark::State& state) {
  const PanelData p = panel(2, std::size_t(state.range(0)));
  GcvOptions o;
  o.refine = false;
  const HeteroUnitModel model(p, 0, kGauss);
  const auto grid = model.gcv(o).eta;
  for (auto _ : state) benchmark::DoNotOptimize(reference::gcv_hetero(p, 0, kGauss, grid));
}

void BM_HeteroGcvSpectral(benchmark::State& state) {
  const PanelData p = panel(2, std::size_t(state.range(0)));
  GcvOptions o;
  o.refine = false;
  for (auto _ : state) benchmark::DoNotOptimize(gcv_hetero(p, 0, kGauss, o));
}

void BM_HomoFitReference(benchmark::State& state) {
  const PanelData p = panel(std::size_t(state.range(0)), 20);
  for (auto _ : state) benchmark::DoNotOptimize(reference::fit_homo(p, kGauss, 0.01));
}

void BM_HomoFitSpectral(benchmark::State& state) {
  const PanelData p = panel(std::size_t(state.range(0)), 20);
  HomoOptions o;
  o.gram_eigen = false;
  for (auto _ : state) benchmark::DoNotOptimize(fit_homo(p, kGauss, 0.01, o));
}

void BM_HomoGcvReference(benchmark::State& state) {
  const PanelData p = panel(std::size_t(state.range(0)), 20);
  GcvOptions o;
  o.points = 10;
  o.refine = false;
  const auto grid = HomoModel(p, kGauss, {6000, false}).gcv(o).eta;
  for (auto _ : state) benchmark::DoNotOptimize(reference::gcv_homo(p, kGauss, grid));
}

void BM_HomoGcvSpectral(benchmark::State& state) {
  const PanelData p = panel(std::size_t(state.range(0)), 20);
  GcvOptions o;
  o.points = 10;
  o.refine = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gcv_homo(p, kGauss, o, {6000, false}));
  }
}

void monte_carlo(benchmark::State& state, int threads) {
  DgpSpec d;
  d.design = Design::HeteroSj;
  d.n = 20;
  d.t = 20;
  EstimatorConfig e;
  e.model = Model::Hetero;
  e.kernel = kGauss;
  for (auto _ : state) benchmark::DoNotOptimize(mc_mse(d, e, 16, threads));
  state.counters["threads"] = threads;
}

void BM_MonteCarloSerial(benchmark::State& state) { monte_carlo(state, 1); }
void BM_MonteCarloParallel(benchmark::State& state) {
  monte_carlo(state, omp_get_num_procs());
}

}  // namespace

BENCHMARK(BM_HeteroGcvReference)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HeteroGcvSpectral)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HomoFitReference)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HomoFitSpectral)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HomoGcvReference)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HomoGcvSpectral)->Arg(10)->Arg(25)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonteCarloParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
