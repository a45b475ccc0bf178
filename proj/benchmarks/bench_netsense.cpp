// SPDX-License-Identifier: Apache-2.0
//
// netsense: cooperative multi-BS localization over limited fronthaul
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include "netsense/ebc.hpp"
#include "netsense/fim.hpp"
#include "netsense/fronthaul.hpp"
#include "netsense/optimizer.hpp"

using namespace netsense;

namespace {

Scenario with_mr(int mr, int samples = 20) {
  Scenario sc = default_scenario();
  sc.mr = mr;
  sc.mc_samples = samples;
  sc.rcs_m2 = 1e6;
  refresh_attenuation(sc);
  return sc;
}

std::vector<CMat> uniform_r(const Scenario& sc) {
  std::vector<CMat> r;
  for (double p : sc.power_budget) r.push_back(CMat::Identity(sc.mt, sc.mt) * p / sc.mt);
  return r;
}

void BM_Pfim(benchmark::State& state) {
  const Scenario sc = with_mr(static_cast<int>(state.range(0)));
  const SampleSet set = draw_samples(sc);
  const auto r = uniform_r(sc);
  const std::vector<CMat> q(2, CMat::Identity(sc.mr, sc.mr) * sc.noise_power);
  for (auto _ : state) benchmark::DoNotOptimize(pcrb(pfim(set, r, q), 2));
}
BENCHMARK(BM_Pfim)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_Rate(benchmark::State& state) {
  const Scenario sc = with_mr(static_cast<int>(state.range(0)));
  const SampleSet set = draw_samples(sc);
  const auto r = uniform_r(sc);
  const CMat q = CMat::Identity(sc.mr, sc.mr) * sc.noise_power;
  for (auto _ : state) benchmark::DoNotOptimize(rate_D(set, r, q, 0));
}
BENCHMARK(BM_Rate)->Arg(4)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_ReducedFim(benchmark::State& state) {
  const Scenario sc = with_mr(static_cast<int>(state.range(0)));
  const SampleSet set = draw_samples(sc);
  const auto r = uniform_r(sc);
  const EbcPlan plan = make_plan(estimate_aoa(sc), sc.mr);
  const std::vector<CMat> q(2, CMat::Identity(plan.lr(), plan.lr()) * sc.noise_power);
  for (auto _ : state) benchmark::DoNotOptimize(pcrb(fim_ebc(set, r, plan.combiners, q), 2));
}
BENCHMARK(BM_ReducedFim)->Arg(16)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_Music(benchmark::State& state) {
  const Scenario sc = with_mr(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_aoa(sc));
}
BENCHMARK(BM_Music)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TransmitSdp(benchmark::State& state) {
  const Scenario sc = with_mr(4, 5);
  const SampleSet set = draw_samples(sc);
  const DesignContext ctx = make_context(sc, set);
  const DesignPoint start = init_feasible(ctx);
  OptimizerOptions opt;
  opt.max_inner = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sca_transmit(ctx, start, opt).objective);
}
BENCHMARK(BM_TransmitSdp)->Unit(benchmark::kMillisecond);

void BM_CompressSdp(benchmark::State& state) {
  const Scenario sc = with_mr(4, 5);
  const SampleSet set = draw_samples(sc);
  const DesignContext ctx = make_context(sc, set);
  const DesignPoint start = init_feasible(ctx);
  OptimizerOptions opt;
  opt.max_inner = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sca_compress(ctx, start, opt).objective);
}
BENCHMARK(BM_CompressSdp)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
