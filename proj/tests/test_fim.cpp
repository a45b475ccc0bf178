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

#include <Eigen/Eigenvalues>

#include "netsense/fim.hpp"
#include "netsense/linalg.hpp"
#include "netsense/oracle.hpp"
#include "support/generators.hpp"

using namespace netsense;

namespace {

/// Three BSs so that the zero patterns of the cross blocks are visible.
Scenario three_bs(testgen::Gen& g) {
  Scenario sc;
  sc.bs_positions = {Vec2(0.9, 0.0), Vec2(-0.9, 0.0), Vec2(0.0, -0.3)};
  sc.targets = {{g.point_in_front(), 0.04}, {g.point_in_front(), 0.03}};
  sc.mt = 3;
  sc.mr = 3;
  sc.noise_power = 1.0;
  sc.power_budget = {1, 1, 1};
  sc.fronthaul_cap = {4, 4, 4};
  sc.mc_samples = 1;
  Attenuation b(3, 2);
  for (int n = 0; n < 3; ++n) {
    for (int u = 0; u < 3; ++u) {
      for (int k = 0; k < 2; ++k) b(n, u, k) = cd(g.normal(), g.normal());
    }
  }
  sc.attenuation = b;
  return sc;
}

struct Instance {
  Scenario sc;
  SampleSet set;
  std::vector<CMat> r, o, oinv;
};

Instance make_instance(testgen::Gen& g, bool three = false) {
  Instance in;
  in.sc = three ? three_bs(g) : g.small_scenario();
  in.set = draw_samples(in.sc, g.rng());
  for (int n = 0; n < in.sc.num_bs(); ++n) {
    in.r.push_back(g.hpd(in.sc.mt));
    in.o.push_back(g.hpd(in.sc.mr, 1.0));
    in.oinv.push_back(linalg::inverse_hpd(in.o.back()));
  }
  return in;
}

double min_eig(const Mat& m) { return Eigen::SelfAdjointEigenSolver<Mat>(m, Eigen::EigenvaluesOnly).eigenvalues()(0); }

TEST(Layout, Dimensions) {
  const FimLayout l(2, 3);
  EXPECT_EQ(l.nk(), 6);
  EXPECT_EQ(l.nnk(), 12);
  EXPECT_EQ(l.zeta_dim(), 30);
  EXPECT_EQ(l.xi_dim(), 30);
  EXPECT_EQ(l.b_index(1, 0, 2), 8);
}

TEST(Blocks, ZeroTransmitGivesZero) {
  testgen::Gen g(1);
  Instance in = make_instance(g);
  std::vector<CMat> zero(2, CMat::Zero(3, 3));
  const Sample& s = in.set.samples[0];
  EXPECT_EQ(block_F1(s, zero, in.oinv).norm(), 0.0);
  EXPECT_EQ(block_F2(s, zero, in.oinv).norm(), 0.0);
  EXPECT_EQ(block_F3(s, zero, in.oinv).norm(), 0.0);
  EXPECT_EQ(assemble_F0_zeta(block_F1(s, zero, in.oinv), block_F2(s, zero, in.oinv), block_F3(s, zero, in.oinv))
                .norm(),
            0.0);
}

TEST(Blocks, ZeroPatterns) {
  testgen::Gen g(2);
  Instance in = make_instance(g, true);
  const Sample& s = in.set.samples[0];
  const int n_bs = 3;
  const int k = 2;
  const FimLayout l(n_bs, k);
  const CMat f2 = block_F2(s, in.r, in.oinv);
  const CMat f3 = block_F3(s, in.r, in.oinv);
  for (int i = 0; i < n_bs; ++i) {
    for (int n = 0; n < n_bs; ++n) {
      for (int u = 0; u < n_bs; ++u) {
        const double blk = f2.block(i * k, l.b_index(n, u, 0), k, k).norm();
        if (i != n && i != u) {
          EXPECT_EQ(blk, 0.0) << i << n << u;
        } else {
          EXPECT_GT(blk, 0.0) << i << n << u;
        }
      }
    }
  }
  for (int a = 0; a < n_bs * n_bs; ++a) {
    for (int b = 0; b < n_bs * n_bs; ++b) {
      const CMat blk = f3.block(a * k, b * k, k, k);
      if (a != b) {
        EXPECT_EQ(blk.norm(), 0.0);
      } else {
        EXPECT_LT((blk - blk.adjoint()).norm(), 1e-12 * blk.norm());
        EXPECT_GT(linalg::min_eigenvalue(linalg::hermitize(blk)), -1e-9 * blk.norm());
      }
    }
  }
}

TEST(Blocks, AssembledMatrixIsSymmetricPsdProperty) {
  testgen::Gen g(3);
  for (int i = 0; i < testgen::kPropertyDraws; ++i) {
    Instance in = make_instance(g);
    const Sample& s = in.set.samples[0];
    const Mat f = assemble_F0_zeta(block_F1(s, in.r, in.oinv), block_F2(s, in.r, in.oinv),
                                   block_F3(s, in.r, in.oinv));
    EXPECT_EQ((f - f.transpose()).norm(), 0.0);
    EXPECT_GT(min_eig(f), -1e-9 * f.norm());
  }
}

TEST(Oracles, BlockAssemblyMatchesElementwiseAndFiniteDifferences) {
  testgen::Gen g(4);
  for (int i = 0; i < 20; ++i) {
    Instance in = make_instance(g, i % 4 == 0);
    const Sample& s = in.set.samples[0];
    const Mat blocks = assemble_F0_zeta(block_F1(s, in.r, in.oinv), block_F2(s, in.r, in.oinv),
                                        block_F3(s, in.r, in.oinv));
    const auto el = oracle::fim_elementwise(s, in.r, in.o);
    const Mat elem = assemble_F0_zeta(el.f1, el.f2, el.f3);
    const Mat fd = oracle::fim_finite_difference(s, in.r, in.o);
    EXPECT_LT(oracle::scaled_relative_error(blocks, elem), 1e-10);
    EXPECT_LT(oracle::scaled_relative_error(blocks, fd), 1e-4);
  }
}

TEST(Oracles, SingleBsReducesToFiniteDifference) {
  testgen::Gen g(5);
  Scenario sc = g.small_scenario();
  sc.bs_positions.resize(1);
  sc.power_budget.resize(1);
  sc.fronthaul_cap.resize(1);
  Attenuation b(1, 2);
  b(0, 0, 0) = cd(0.7, -0.2);
  b(0, 0, 1) = cd(-0.4, 1.1);
  sc.attenuation = b;
  const SampleSet set = draw_samples(sc, g.rng());
  const std::vector<CMat> r{g.hpd(3)};
  const std::vector<CMat> o{g.hpd(3, 1.0)};
  const std::vector<CMat> oinv{linalg::inverse_hpd(o[0])};
  const Sample& s = set.samples[0];
  const Mat f = assemble_F0_zeta(block_F1(s, r, oinv), block_F2(s, r, oinv), block_F3(s, r, oinv));
  EXPECT_LT(oracle::scaled_relative_error(f, oracle::fim_finite_difference(s, r, o)), 1e-4);
}

TEST(Mutation, CorruptedSignIsDetected) {
  testgen::Gen g(6);
  Instance in = make_instance(g);
  const Sample& s = in.set.samples[0];
  const auto el = oracle::fim_elementwise(s, in.r, in.o);
  const Mat elem = assemble_F0_zeta(el.f1, el.f2, el.f3);
  testing_hooks::set_fim_mutation(true);
  const Mat bad = assemble_F0_zeta(block_F1(s, in.r, in.oinv), block_F2(s, in.r, in.oinv),
                                   block_F3(s, in.r, in.oinv));
  testing_hooks::set_fim_mutation(false);
  EXPECT_GT(oracle::scaled_relative_error(bad, elem), 1e-4);
}

TEST(ChainRule, SingleTargetSingleBs) {
  Scenario sc = default_scenario();
  sc.bs_positions.resize(1);
  sc.targets.resize(1);
  sc.power_budget.resize(1);
  sc.fronthaul_cap.resize(1);
  sc.mc_samples = 1;
  refresh_attenuation(sc);
  const SampleSet set = draw_samples(sc);
  const Mat u = chain_rule_U(set.samples[0]);
  ASSERT_EQ(u.rows(), 4);
  ASSERT_EQ(u.cols(), 3);
  EXPECT_LT((u.block(0, 0, 2, 1) - set.samples[0].jacobian[0]).norm(), 1e-15);
  EXPECT_EQ(u(2, 1), 1.0);
  EXPECT_EQ(u(3, 2), 1.0);
}

TEST(ChainRule, NonzeroCount) {
  const Scenario sc = default_scenario();
  const SampleSet set = draw_samples(sc);
  const Mat u = chain_rule_U(set.samples[0]);
  const FimLayout l(2, 2);
  EXPECT_EQ(u.rows(), l.xi_dim());
  EXPECT_EQ(u.cols(), l.zeta_dim());
  int nonzero = 0;
  for (int i = 0; i < u.rows(); ++i) {
    for (int j = 0; j < u.cols(); ++j) nonzero += u(i, j) != 0.0;
  }
  EXPECT_EQ(nonzero, 2 * l.nk() + 2 * l.nnk());
}

TEST(ChainRule, SampleFimMatchesExplicitProduct) {
  testgen::Gen g(7);
  Instance in = make_instance(g);
  const Sample& s = in.set.samples[0];
  const Mat f0 = assemble_F0_zeta(block_F1(s, in.r, in.oinv), block_F2(s, in.r, in.oinv),
                                  block_F3(s, in.r, in.oinv));
  const Mat u = chain_rule_U(s);
  const Mat direct = u * f0 * u.transpose();
  const Mat fast = sample_fim_xi(s, rx_grams(s, in.oinv), tx_grams(s, in.r));
  EXPECT_LT(testgen::rel_diff(direct, fast), 1e-12);
}

TEST(Prior, ClosedForm) {
  const auto priors = default_scenario().targets;
  const Mat fp = prior_fim(priors, 2);
  EXPECT_NEAR(fp(0, 0), 1.0 / 0.0009, 1e-9);
  EXPECT_NEAR(fp(1, 1), 1.0 / 0.0009, 1e-9);
  EXPECT_NEAR(fp(2, 2), 1.0 / (0.048 * 0.048), 1e-9);
  EXPECT_EQ(fp.bottomRightCorner(fp.rows() - 4, fp.cols() - 4).norm(), 0.0);
  EXPECT_EQ(fp(0, 1), 0.0);
}

TEST(Prior, MonteCarloAgreement) {
  const auto priors = default_scenario().targets;
  std::mt19937_64 rng(9);
  const Mat mc = oracle::prior_fim_monte_carlo(priors, 2, 100000, rng);
  const Mat fp = prior_fim(priors, 2);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(mc(i, i) / fp(i, i), 1.0, 0.02);
}

TEST(Pfim, HugeCompressionNoiseLeavesPrior) {
  const Scenario sc = default_scenario();
  const SampleSet set = draw_samples(sc);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  std::vector<CMat> q(2, CMat::Identity(4, 4) * 1e12 * sc.noise_power);
  const Mat f = pfim(set, r, q);
  const Mat fp = prior_fim(set.priors, 2);
  // Only the position block returns to the prior; the attenuation block has
  // no prior and stays data-driven.
  EXPECT_LT((f.topLeftCorner(4, 4) - fp.topLeftCorner(4, 4)).norm() / fp.norm(), 1e-6);
  EXPECT_NEAR(pcrb(f, 2), fp.topLeftCorner(4, 4).inverse().trace(), 1e-6 * pcrb(f, 2));
}

TEST(Pfim, LoewnerMonotoneInCompressionProperty) {
  testgen::Gen g(8);
  for (int i = 0; i < testgen::kPropertyDraws; ++i) {
    Scenario sc = g.design_scenario();
    const SampleSet set = draw_samples(sc);
    std::vector<CMat> r, q0, q;
    for (int n = 0; n < 2; ++n) {
      r.push_back(g.covariance(sc.mt, sc.power_budget[n]));
      q0.push_back(CMat::Zero(sc.mr, sc.mr));
      q.push_back(g.hpd(sc.mr, 0.01) * sc.noise_power * g.uniform(0.01, 10.0));
    }
    const Mat a = pfim(set, r, q0);
    const Mat b = pfim(set, r, q);
    EXPECT_GT(min_eig(a - b), -1e-9 * a.norm());
    EXPECT_LE(pcrb(a, 2), pcrb(b, 2) * (1 + 1e-12));
  }
}

TEST(Pfim, SymmetricPositiveDefinite) {
  const Scenario sc = default_scenario();
  const SampleSet set = draw_samples(sc);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  std::vector<CMat> q(2, CMat::Identity(4, 4) * sc.noise_power);
  const Mat f = pfim(set, r, q);
  EXPECT_EQ((f - f.transpose()).norm(), 0.0);
  // The b block is only positive definite through the data term.
  EXPECT_GT(min_eig(f.topLeftCorner(4, 4)), 0.0);
}

TEST(Pfim, TargetRelabelingInvariance) {
  testgen::Gen g(10);
  Scenario sc = g.design_scenario();
  const SampleSet set = draw_samples(sc);
  std::vector<CMat> r, q;
  for (int n = 0; n < 2; ++n) {
    r.push_back(g.covariance(sc.mt, sc.power_budget[n]));
    q.push_back(g.hpd(sc.mr) * sc.noise_power);
  }
  // Swap the targets consistently in the priors, samples and attenuations.
  SampleSet swapped = set;
  std::swap(swapped.priors[0], swapped.priors[1]);
  for (auto& s : swapped.samples) {
    std::swap(s.positions[0], s.positions[1]);
    s.theta.col(0).swap(s.theta.col(1));
    for (int n = 0; n < 2; ++n) {
      s.jacobian[n].col(0).swap(s.jacobian[n].col(1));
      s.a[n].col(0).swap(s.a[n].col(1));
      s.da[n].col(0).swap(s.da[n].col(1));
      s.v[n].col(0).swap(s.v[n].col(1));
      s.dv[n].col(0).swap(s.dv[n].col(1));
      for (int u = 0; u < 2; ++u) std::swap(s.b(n, u, 0), s.b(n, u, 1));
    }
  }
  EXPECT_LT(testgen::rel_diff(pcrb(pfim(set, r, q), 2), pcrb(pfim(swapped, r, q), 2)), 1e-10);
}

TEST(Pcrb, ClosedForms) {
  Mat f = Mat::Identity(6, 6) * 4.0;
  EXPECT_NEAR(pcrb(f, 2), 1.0, 1e-15);
  Vec d(6);
  d << 2, 4, 5, 8, 1, 1;
  EXPECT_NEAR(pcrb(Mat(d.asDiagonal()), 2), 0.5 + 0.25 + 0.2 + 0.125, 1e-15);
  Mat singular = Mat::Zero(4, 4);
  singular(0, 0) = 1;
  EXPECT_THROW(pcrb(singular, 2), SingularFim);
}

TEST(Pcrb, AddingPsdNeverIncreasesProperty) {
  testgen::Gen g(11);
  for (int i = 0; i < testgen::kPropertyDraws; ++i) {
    Mat a(6, 6);
    for (int p = 0; p < 6; ++p) {
      for (int q = 0; q < 6; ++q) a(p, q) = g.normal();
    }
    const Mat f = a * a.transpose() + 0.1 * Mat::Identity(6, 6);
    const Vec v = Vec::NullaryExpr(6, [&] { return g.normal(); });
    EXPECT_LE(pcrb(f + v * v.transpose(), 2), pcrb(f, 2) * (1 + 1e-12));
  }
}

TEST(Pcrb, BoundedByPrior) {
  const Scenario sc = default_scenario();
  const SampleSet set = draw_samples(sc);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  std::vector<CMat> q(2, CMat::Zero(4, 4));
  double prior = 0.0;
  for (const auto& t : sc.targets) prior += 2.0 * t.radius * t.radius;
  const double v = pcrb(pfim(set, r, q), 2);
  EXPECT_GT(v, 0.0);
  EXPECT_LE(v, prior);
}

TEST(Affine, MapsMatchDirectEvaluation) {
  testgen::Gen g(12);
  Scenario sc = g.design_scenario();
  const SampleSet set = draw_samples(sc);
  std::vector<CMat> r, q;
  for (int n = 0; n < 2; ++n) {
    r.push_back(g.covariance(sc.mt, sc.power_budget[n]));
    q.push_back(g.hpd(sc.mr) * sc.noise_power);
  }
  const auto oinv = noise_inverse(q, sc.noise_power);
  const Mat direct = pfim_from_oinv(set, r, oinv);
  linalg::HermitianBasis bt(sc.mt), br(sc.mr);
  Vec x(2 * bt.size());
  x << bt.to_params(r[0]), bt.to_params(r[1]);
  EXPECT_LT(testgen::rel_diff(pfim_affine_in_R(set, oinv).evaluate(x), direct), 1e-10);
  Vec y(2 * br.size());
  y << br.to_params(oinv[0]), br.to_params(oinv[1]);
  const Mat via_t = pfim_affine_in_T(set, r).evaluate(y);
  EXPECT_LT(testgen::rel_diff(Mat(via_t - prior_fim(set.priors, 2)), Mat(direct - prior_fim(set.priors, 2))), 1e-10);
}

TEST(Bundle, ConsistentWithPfim) {
  const Scenario sc = default_scenario();
  const SampleSet set = draw_samples(sc);
  std::vector<CMat> r(2, CMat::Identity(4, 4) * sc.power_budget[0] / 4.0);
  std::vector<CMat> q(2, CMat::Identity(4, 4) * sc.noise_power);
  const FimBundle b = build_bundle(set, r, q);
  EXPECT_EQ(b.f1.size(), set.size());
  EXPECT_LT(testgen::rel_diff(b.total, pfim(set, r, q)), 1e-12);
  EXPECT_LT(testgen::rel_diff(Mat(b.f0_xi + b.prior), b.total), 1e-14);
}

}  // namespace
