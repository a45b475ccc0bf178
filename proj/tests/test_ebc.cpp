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

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <sstream>

#include "netsense/ebc.hpp"
#include "netsense/fim.hpp"
#include "netsense/fronthaul.hpp"
#include "netsense/linalg.hpp"
#include "support/generators.hpp"

using namespace netsense;

namespace {

int numeric_rank(const CMat& m) {
  Eigen::JacobiSVD<CMat> svd(m);
  const Vec s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i) r += s(i) > 1e-9 * s(0);
  return r;
}

std::vector<std::vector<double>> true_angles(const SampleSet& set) {
  std::vector<std::vector<double>> th(set.num_bs);
  for (int n = 0; n < set.num_bs; ++n) {
    for (int k = 0; k < set.num_targets; ++k) th[n].push_back(set.samples[0].theta(n, k));
  }
  return th;
}

Scenario single_sample(int mr, double rcs = 1e4) {
  Scenario sc = default_scenario();
  sc.mr = mr;
  sc.mc_samples = 1;
  sc.rcs_m2 = rcs;
  refresh_attenuation(sc);
  return sc;
}

TEST(Music, NoiselessSingleTarget) {
  const CVec a = steering(0.3, 32);
  const CMat cov = a * a.adjoint() + 1e-9 * CMat::Identity(32, 32);
  const auto est = music(cov, 1);
  ASSERT_EQ(est.size(), 1u);
  EXPECT_NEAR(est[0], 0.3, 1e-3);
}

TEST(Music, TwoSourcesSortedAscending) {
  const CMat a = steering_matrix({0.4, -0.2}, 16);
  const CMat cov = a * a.adjoint() + 1e-6 * CMat::Identity(16, 16);
  const auto est = music(cov, 2);
  ASSERT_EQ(est.size(), 2u);
  EXPECT_NEAR(est[0], -0.2, 1e-3);
  EXPECT_NEAR(est[1], 0.4, 1e-3);
  // Relabeling the sources gives the same sorted set.
  const CMat b = steering_matrix({-0.2, 0.4}, 16);
  const auto est2 = music(b * b.adjoint() + 1e-6 * CMat::Identity(16, 16), 2);
  EXPECT_NEAR(est2[0], est[0], 1e-12);
  EXPECT_NEAR(est2[1], est[1], 1e-12);
}

TEST(Music, TooFewPeaksFails) {
  const CVec a = steering(0.1, 8);
  EXPECT_THROW(music(a * a.adjoint() + 1e-6 * CMat::Identity(8, 8), 9), Error);
}

TEST(Music, LargerArrayIsMoreAccurate) {
  auto rmse = [](int mr) {
    Scenario sc = default_scenario();
    sc.mr = mr;
    double acc = 0.0;
    int count = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      MusicOptions o;
      o.seed = seed;
      o.snr_db = -5.0;
      const auto est = estimate_aoa(sc, o);
      for (int n = 0; n < sc.num_bs(); ++n) {
        for (int k = 0; k < sc.num_targets(); ++k) {
          const double e = est[n][k] - angle_between(sc.bs_positions[n], sc.targets[k].center);
          acc += e * e;
          ++count;
        }
      }
    }
    return std::sqrt(acc / count);
  };
  EXPECT_LT(rmse(64), rmse(16));
}

TEST(Music, EstimatesAssociateWithTargets) {
  Scenario sc = default_scenario();
  sc.mr = 16;
  const auto est = estimate_aoa(sc);
  ASSERT_EQ(est.size(), 2u);
  for (int n = 0; n < 2; ++n) {
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(est[n][k], angle_between(sc.bs_positions[n], sc.targets[k].center), 5e-3);
    }
  }
}

TEST(Delta, StructureAndRank) {
  testgen::Gen g(51);
  for (int i = 0; i < 20; ++i) {
    const int k = g.integer(1, 3);
    const int mr = 2 * k + g.integer(0, 6);
    std::vector<double> th;
    for (int j = 0; j < k; ++j) th.push_back(g.uniform(-1.2, 1.2));
    const CMat d = delta_matrix(th, mr);
    ASSERT_EQ(d.rows(), mr);
    ASSERT_EQ(d.cols(), 2 * k);
    const CMat a = steering_matrix(th, mr);
    EXPECT_LT((a.adjoint() * d.rightCols(k)).norm(), 1e-9 * d.norm());
    EXPECT_EQ(numeric_rank(d), 2 * k);
  }
}

TEST(Delta, SingleTargetSpansPlane) {
  const CMat d = delta_matrix({0.37}, 2);
  EXPECT_GT(std::abs(d.determinant()), 1e-6);
}

TEST(Delta, CoincidentAnglesRejected) { EXPECT_THROW(delta_matrix({0.2, 0.2}, 8), DegenerateAngles); }

TEST(Beamformers, OrthonormalAndSpanning) {
  testgen::Gen g(52);
  for (int i = 0; i < 20; ++i) {
    const int mr = g.integer(6, 24);
    const std::vector<double> th{g.uniform(-1.0, -0.1), g.uniform(0.1, 1.0)};
    const CMat c = beamformers(th, mr);
    const CMat d = delta_matrix(th, mr);
    EXPECT_LT((c.adjoint() * c - CMat::Identity(4, 4)).norm(), 1e-10);
    EXPECT_LE(((CMat::Identity(mr, mr) - c * c.adjoint()) * d).norm(), 1e-8 * d.norm());
  }
}

TEST(Plan, KindsHaveExpectedWidths) {
  const std::vector<std::vector<double>> th{{-0.3, 0.5}, {0.2, -0.6}};
  EXPECT_EQ(make_plan(th, 12, BeamformerKind::proposed).lr(), 4);
  EXPECT_EQ(make_plan(th, 12, BeamformerKind::reduced).lr(), 3);
  EXPECT_EQ(make_plan(th, 12, BeamformerKind::augmented).lr(), 5);
  EXPECT_EQ(make_plan(th, 12, BeamformerKind::dft).lr(), 4);
  EXPECT_EQ(make_plan(th, 12, BeamformerKind::identity).lr(), 12);
  for (auto kind : {BeamformerKind::proposed, BeamformerKind::reduced, BeamformerKind::augmented,
                    BeamformerKind::dft, BeamformerKind::identity}) {
    const EbcPlan p = make_plan(th, 12, kind);
    for (const auto& c : p.combiners) {
      EXPECT_LT((c.adjoint() * c - CMat::Identity(c.cols(), c.cols())).norm(), 1e-10) << to_string(kind);
    }
    EXPECT_EQ(beamformer_kind_from_string(to_string(kind)), kind);
  }
  EXPECT_THROW(beamformer_kind_from_string("nope"), ConfigError);
}

TEST(Plan, TextRoundTrip) {
  const EbcPlan p = make_plan({{-0.3, 0.5}, {0.2, -0.6}}, 8, BeamformerKind::augmented);
  std::stringstream ss;
  write_plan(ss, p);
  const EbcPlan q = read_plan(ss);
  EXPECT_EQ(q.kind, p.kind);
  ASSERT_EQ(q.combiners.size(), p.combiners.size());
  for (std::size_t n = 0; n < p.combiners.size(); ++n) {
    EXPECT_LT((q.combiners[n] - p.combiners[n]).norm(), 1e-15);
    EXPECT_EQ(q.angles[n], p.angles[n]);
  }
}

TEST(ReducedFim, IdentityCombinerMatchesFullModel) {
  testgen::Gen g(53);
  const Scenario sc = single_sample(6);
  const SampleSet set = draw_samples(sc);
  std::vector<CMat> r, q, c;
  for (int n = 0; n < 2; ++n) {
    r.push_back(g.covariance(4, sc.power_budget[n]));
    q.push_back(g.hpd(6) * sc.noise_power);
    c.push_back(CMat::Identity(6, 6));
  }
  EXPECT_LT(testgen::rel_diff(fim_ebc(set, r, c, q), pfim(set, r, q)), 1e-12);
  EXPECT_NEAR(rate_ebc(set, r, c[0], q[0], 0), rate_D(set, r, q[0], 0), 1e-10);
}

TEST(ReducedFim, HugeNoiseLeavesPrior) {
  const Scenario sc = single_sample(6);
  const SampleSet set = draw_samples(sc);
  const EbcPlan plan = make_plan(true_angles(set), 6);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  std::vector<CMat> q(2, CMat::Identity(4, 4) * 1e12 * sc.noise_power);
  const Mat f = fim_ebc(set, r, plan.combiners, q);
  const Mat fp = prior_fim(set.priors, 2);
  // Only the position block returns to the prior; the attenuation block has
  // no prior and stays data-driven.
  EXPECT_LT((f.topLeftCorner(4, 4) - fp.topLeftCorner(4, 4)).norm() / fp.norm(), 1e-6);
  EXPECT_NEAR(pcrb(f, 2), fp.topLeftCorner(4, 4).inverse().trace(), 1e-6 * pcrb(f, 2));
  EXPECT_EQ((f - f.transpose()).norm(), 0.0);
}

TEST(ReducedFim, CombinerInvarianceProperty) {
  testgen::Gen g(54);
  for (int i = 0; i < 20; ++i) {
    Scenario sc = single_sample(g.integer(5, 12));
    for (auto& t : sc.targets) t.center = g.point_in_front(0.6, 0.4, 1.0);
    sc.rng_seed = g.rng()();
    refresh_attenuation(sc);
    const SampleSet set = draw_samples(sc);
    std::vector<CMat> r;
    for (int n = 0; n < 2; ++n) r.push_back(g.covariance(4, sc.power_budget[n]));
    const EbcPlan plan = make_plan(true_angles(set), sc.mr);
    const double full = pcrb(pfim(set, r, std::vector<CMat>(2, CMat::Zero(sc.mr, sc.mr))), 2);
    const std::vector<CMat> qd(2, CMat::Zero(4, 4));
    const double reduced = pcrb(fim_ebc(set, r, plan.combiners, qd), 2);
    EXPECT_LE(std::abs(full - reduced), 1e-6 * full);
    std::vector<CMat> cl;
    for (const auto& c : plan.combiners) cl.push_back(c * (g.complex(4, 4) + 3.0 * CMat::Identity(4, 4)));
    EXPECT_LE(std::abs(full - pcrb(fim_ebc(set, r, cl, qd), 2)), 1e-6 * full);
  }
}

TEST(ReducedFim, BeamformerOrderingAtFixedDesign) {
  const Scenario sc = single_sample(10, 1e6);
  const SampleSet set = draw_samples(sc);
  const auto th = true_angles(set);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  auto value = [&](BeamformerKind kind) {
    const EbcPlan p = make_plan(th, sc.mr, kind);
    return pcrb(fim_ebc(set, r, p.combiners, std::vector<CMat>(2, CMat::Zero(p.lr(), p.lr()))), 2);
  };
  const double proposed = value(BeamformerKind::proposed);
  EXPECT_GE(value(BeamformerKind::reduced), proposed * (1 - 1e-9));
  EXPECT_LE(value(BeamformerKind::augmented), proposed * (1 + 1e-6));
  EXPECT_GE(value(BeamformerKind::dft), proposed * (1 - 1e-9));
}

TEST(ReducedRate, ClosedFormAndMonotone) {
  const Scenario sc = single_sample(8);
  const SampleSet set = draw_samples(sc);
  const EbcPlan plan = make_plan(true_angles(set), 8);
  const std::vector<CMat> zero(2, CMat::Zero(4, 4));
  EXPECT_NEAR(rate_ebc(set, zero, plan.combiners[0], CMat::Identity(4, 4) * sc.noise_power, 0), 4.0, 1e-10);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double t = 1e-2; t < 1e4; t *= 4.0) {
    const double v = rate_ebc(set, r, plan.combiners[1], CMat::Identity(4, 4) * t * sc.noise_power, 1);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_THROW(rate_ebc(set, r, plan.combiners[0], CMat::Zero(4, 4), 0), RateUnbounded);
}

TEST(ReducedRate, NotAboveFullDimensionRate) {
  const Scenario sc = single_sample(8, 1e6);
  const SampleSet set = draw_samples(sc);
  const EbcPlan plan = make_plan(true_angles(set), 8);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  const double q = sc.noise_power;
  EXPECT_LE(rate_ebc(set, r, plan.combiners[0], CMat::Identity(4, 4) * q, 0),
            rate_D(set, r, CMat::Identity(8, 8) * q, 0));
}

TEST(Optimize, DescentAndNearFullPerformance) {
  Scenario sc = default_scenario();
  sc.mr = 8;
  sc.rcs_m2 = 1e6;
  sc.mc_samples = 10;
  refresh_attenuation(sc);
  const SampleSet set = draw_samples(sc);
  const EbcPlan plan = make_plan(estimate_aoa(sc), sc.mr);
  const OptimizerReport ebc = optimize_ebc(sc, set, plan);
  for (std::size_t i = 1; i < ebc.outer_objective.size(); ++i) {
    EXPECT_LE(ebc.outer_objective[i], ebc.outer_objective[i - 1] * (1 + 1e-6));
  }
  const OptimizerReport full = alternate(make_context(sc, set));
  EXPECT_LE(ebc.final.objective, full.final.objective * 1.05);
}

}  // namespace
