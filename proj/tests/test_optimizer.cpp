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

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "netsense/fronthaul.hpp"
#include "netsense/linalg.hpp"
#include "netsense/optimizer.hpp"
#include "support/generators.hpp"

using namespace netsense;

namespace {

struct Problem {
  Scenario sc;
  SampleSet set;
  DesignContext ctx;

  explicit Problem(Scenario s) : sc(std::move(s)), set(draw_samples(sc)), ctx(make_context(sc, set)) {}
};

Scenario data_limited(double rcs = 1e6) {
  Scenario sc = default_scenario();
  sc.rcs_m2 = rcs;
  refresh_attenuation(sc);
  return sc;
}

void expect_nonincreasing(const std::vector<double>& v, double slack) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    EXPECT_LE(v[i], v[i - 1] * (1.0 + slack)) << "step " << i;
  }
}

std::vector<double> objectives(const OptimizerReport& r) {
  std::vector<double> out;
  for (const auto& e : r.trace) out.push_back(e.objective);
  return out;
}

TEST(Init, UniformStartMeetsTargetRate) {
  const Problem s(data_limited());
  const DesignPoint p = init_feasible(s.ctx, 0.95);
  for (int n = 0; n < 2; ++n) {
    EXPECT_LT((p.r[n] - CMat::Identity(4, 4) * s.sc.power_budget[n] / 4.0).norm(), 1e-15);
    EXPECT_NEAR(p.rates[n], 0.95 * s.sc.fronthaul_cap[n], 1e-6);
    EXPECT_LT((p.q[n] - CMat::Identity(4, 4) * p.q[n](0, 0).real()).norm(), 1e-20);
  }
  EXPECT_EQ(max_violation(s.ctx, p), 0.0);
}

TEST(Init, InfiniteCapacityMeansNoCompression) {
  Scenario sc = data_limited();
  sc.fronthaul_cap = {std::numeric_limits<double>::infinity(), 8.0};
  const Problem s(sc);
  const DesignPoint p = init_feasible(s.ctx);
  EXPECT_EQ(p.q[0].norm(), 0.0);
  EXPECT_GT(p.q[1].norm(), 0.0);
}

TEST(Init, Deterministic) {
  const Problem s(data_limited());
  const DesignPoint a = init_feasible(s.ctx);
  const DesignPoint b = init_feasible(s.ctx);
  EXPECT_EQ(a.objective, b.objective);
  EXPECT_EQ((a.q[0] - b.q[0]).norm(), 0.0);
}

TEST(Bisection, ZeroPowerStillReachesTarget) {
  const Problem s(data_limited());
  const std::vector<CMat> zero(2, CMat::Zero(4, 4));
  bool failed = true;
  const double q = bisect_uniform_q(s.ctx, zero, 0, 2.0, &failed);
  EXPECT_FALSE(failed);
  EXPECT_NEAR(rate_D(s.set, zero, CMat::Identity(4, 4) * q, 0), 2.0, 1e-6);
}

TEST(TransmitSca, DescentAndFeasibilityProperty) {
  testgen::Gen g(41);
  for (int i = 0; i < 5; ++i) {
    const Problem s(g.design_scenario());
    OptimizerOptions opt;
    OptimizerReport rep;
    const DesignPoint start = init_feasible(s.ctx);
    const DesignPoint p = sca_transmit(s.ctx, start, opt, &rep);
    expect_nonincreasing(objectives(rep), 1e-6);
    EXPECT_LE(p.objective, start.objective * (1 + 1e-12));
    for (int n = 0; n < 2; ++n) {
      EXPECT_LE(p.r[n].trace().real(), s.sc.power_budget[n] * (1 + 1e-8));
      EXPECT_LE(p.rates[n], s.sc.fronthaul_cap[n] + 1e-6);
      EXPECT_GT(linalg::min_eigenvalue(p.r[n]), -1e-9 * s.sc.power_budget[n]);
    }
  }
}

TEST(TransmitSca, InactiveRateConstraintMatchesUnconstrainedSdp) {
  Scenario sc = data_limited();
  sc.fronthaul_cap = {1e6, 1e6};
  const Problem s(sc);
  OptimizerOptions opt;
  const DesignPoint start = init_feasible(s.ctx);
  const DesignPoint sca = sca_transmit(s.ctx, start, opt);
  const DesignPoint direct = solve_transmit_unconstrained(s.ctx, start.q, opt);
  EXPECT_NEAR(sca.objective, direct.objective, 1e-6 * direct.objective);
}

TEST(CompressSca, DescentAndPsdProperty) {
  testgen::Gen g(42);
  for (int i = 0; i < 5; ++i) {
    const Problem s(g.design_scenario());
    OptimizerOptions opt;
    OptimizerReport rep;
    const DesignPoint start = init_feasible(s.ctx);
    const DesignPoint p = sca_compress(s.ctx, start, opt, &rep);
    expect_nonincreasing(objectives(rep), 1e-6);
    for (int n = 0; n < 2; ++n) {
      EXPECT_LT((p.q[n] - p.q[n].adjoint()).norm(), 1e-12 * p.q[n].norm());
      EXPECT_GT(linalg::min_eigenvalue(p.q[n]), -1e-8 * s.sc.noise_power);
      EXPECT_LE(p.rates[n], s.sc.fronthaul_cap[n] + 1e-6);
    }
  }
}

TEST(Alternate, OuterDescentAndBenchmarkOrdering) {
  const Problem s(data_limited());
  OptimizerOptions opt;
  const OptimizerReport rep = alternate(s.ctx, opt);
  expect_nonincreasing(rep.outer_objective, 1e-6);
  expect_nonincreasing(objectives(rep), 1e-6);
  EXPECT_FALSE(rep.termination.empty());
  EXPECT_EQ(static_cast<int>(rep.outer_wall_ms.size()), rep.outer_iterations);

  const DesignPoint b2 = sca_compress(s.ctx, init_feasible(s.ctx), opt);
  const DesignPoint b1 = sca_transmit(s.ctx, init_feasible(s.ctx, 1.0), opt);
  const DesignPoint b3 = solve_transmit_unconstrained(s.ctx, std::vector<CMat>(2, CMat::Zero(4, 4)), opt);
  EXPECT_LE(rep.final.objective, b2.objective * (1 + 1e-6));
  EXPECT_LE(rep.final.objective, b1.objective * (1 + 1e-6));
  EXPECT_GE(rep.final.objective, b3.objective - 1e-8);
  EXPECT_EQ(max_violation(s.ctx, rep.final), 0.0);
}

TEST(Alternate, DeterministicTrace) {
  const Problem s(data_limited(1e5));
  const OptimizerReport a = alternate(s.ctx);
  const OptimizerReport b = alternate(s.ctx);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_NEAR(a.trace[i].objective, b.trace[i].objective, 1e-9 * a.trace[i].objective);
  }
}

TEST(Alternate, SkipsCompressionWithoutCaps) {
  Scenario sc = data_limited();
  sc.fronthaul_cap = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const Problem s(sc);
  const OptimizerReport rep = alternate(s.ctx);
  for (const auto& e : rep.trace) EXPECT_NE(e.phase, 'Q');
  const DesignPoint b3 = solve_transmit_unconstrained(s.ctx, std::vector<CMat>(2, CMat::Zero(4, 4)), {});
  EXPECT_NEAR(rep.final.objective, b3.objective, 1e-6 * b3.objective);
}

TEST(Restore, PowerScalingFixesRateViolation) {
  const Problem s(data_limited(1e7));
  DesignPoint p = init_feasible(s.ctx);
  for (auto& q : p.q) q *= 1e-3;
  evaluate(s.ctx, p);
  ASSERT_GT(max_violation(s.ctx, p), 0.0);
  DesignPoint a = p;
  EXPECT_TRUE(restore_rates_by_power(s.ctx, a));
  EXPECT_EQ(max_violation(s.ctx, a), 0.0);
  DesignPoint b = p;
  EXPECT_TRUE(restore_rates_by_noise(s.ctx, b));
  EXPECT_EQ(max_violation(s.ctx, b), 0.0);
  DesignPoint ok = init_feasible(s.ctx);
  EXPECT_FALSE(restore_rates_by_power(s.ctx, ok));
}

TEST(Report, CsvColumns) {
  const Problem s(data_limited());
  OptimizerOptions opt;
  opt.max_outer = 1;
  const OptimizerReport rep = alternate(s.ctx, opt);
  const std::string path = ::testing::TempDir() + "netsense_trace.csv";
  write_report_csv(path, rep);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "iter,phase,objective,max_constraint_violation,solver_status");
  int rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  EXPECT_EQ(rows, static_cast<int>(rep.trace.size()));
  std::remove(path.c_str());
}

TEST(Evaluate, RatesInfiniteForSingularQ) {
  const Problem s(data_limited());
  const auto rates = evaluate_rates(s.ctx, init_feasible(s.ctx).r, std::vector<CMat>(2, CMat::Zero(4, 4)));
  EXPECT_TRUE(std::isinf(rates[0]));
}

}  // namespace
