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

#include <cmath>
#include <numbers>

#include "netsense/scenario.hpp"
#include "support/generators.hpp"

using namespace netsense;

namespace {

constexpr double kPi = std::numbers::pi;

TEST(Steering, BroadsideIsAllOnes) {
  const CVec a = steering(0.0, 4);
  for (int m = 0; m < 4; ++m) EXPECT_NEAR(std::abs(a(m) - cd(1.0, 0.0)), 0.0, 1e-15);
}

TEST(Steering, EndfireTwoElements) {
  const CVec a = steering(kPi / 2, 2);
  EXPECT_NEAR(std::abs(a(0) - cd(1.0, 0.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a(1) - cd(-1.0, 0.0)), 0.0, 1e-12);
}

TEST(Steering, UnitModulusProperty) {
  testgen::Gen g(11);
  for (int i = 0; i < 100; ++i) {
    const int m = g.integer(1, 32);
    const CVec a = steering(g.uniform(-kPi, kPi), m);
    for (int e = 0; e < m; ++e) EXPECT_NEAR(std::abs(a(e)), 1.0, 1e-14);
  }
}

TEST(SteeringDerivative, ZeroAtEndfireAndAtReferenceElement) {
  const CVec d = steering_derivative(kPi / 2, 5);
  EXPECT_LT(d.norm(), 1e-14);
  testgen::Gen g(3);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(std::abs(steering_derivative(g.uniform(-1.5, 1.5), 6)(0)), 0.0);
}

TEST(SteeringDerivative, MatchesFiniteDifferenceProperty) {
  testgen::Gen g(12);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const int m = g.integer(2, 16);
    const double th = g.uniform(-1.4, 1.4);
    const CVec fd = (steering(th + h, m) - steering(th - h, m)) / (2 * h);
    const CVec d = steering_derivative(th, m);
    EXPECT_LT((fd - d).norm() / d.norm(), 1e-6) << "theta " << th << " M " << m;
  }
}

TEST(Geometry, AngleConvention) {
  // Broadside is +y, positive angles towards +x.
  EXPECT_NEAR(angle_between(Vec2(0, 0), Vec2(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(angle_between(Vec2(0, 0), Vec2(1, 1)), kPi / 4, 1e-15);
  EXPECT_NEAR(angle_between(Vec2(0, 0), Vec2(-1, 1)), -kPi / 4, 1e-15);
  EXPECT_NEAR(angle_between(Vec2(0, 0), Vec2(0, -1)), kPi, 1e-15);
  EXPECT_THROW(angle_between(Vec2(1, 1), Vec2(1, 1)), DegenerateGeometry);
}

TEST(Geometry, JacobianMatchesFiniteDifferenceProperty) {
  testgen::Gen g(13);
  const double h = 1e-7;
  for (int i = 0; i < 100; ++i) {
    const Vec2 bs(g.uniform(-1, 1), g.uniform(-0.5, 0.2));
    const Vec2 t = g.point_in_front();
    const Vec2 j = angle_jacobian(bs, t);
    const Vec2 fd((angle_between(bs, t + Vec2(h, 0)) - angle_between(bs, t - Vec2(h, 0))) / (2 * h),
                  (angle_between(bs, t + Vec2(0, h)) - angle_between(bs, t - Vec2(0, h))) / (2 * h));
    EXPECT_LT((fd - j).norm() / j.norm(), 1e-6);
  }
}

TEST(Geometry, JacobianOnAxes) {
  // Removable singularities of the tan/cot forms.
  const Vec2 a = angle_jacobian(Vec2(0, 0), Vec2(0, 2));
  EXPECT_NEAR(a.x(), 0.5, 1e-15);
  EXPECT_NEAR(a.y(), 0.0, 1e-15);
  const Vec2 b = angle_jacobian(Vec2(0, 0), Vec2(2, 0));
  EXPECT_NEAR(b.x(), 0.0, 1e-15);
  EXPECT_NEAR(b.y(), -0.5, 1e-15);
}

TEST(Units, PowerAndNoise) {
  EXPECT_NEAR(dbm_to_watt(30.0), 1.0, 1e-15);
  EXPECT_NEAR(dbm_to_watt(0.0), 1e-3, 1e-18);
  // -169 dBm/Hz over 1 MHz is -109 dBm.
  EXPECT_NEAR(noise_power_from_psd(-169.0, 1e6) / dbm_to_watt(-109.0), 1.0, 1e-12);
}

TEST(DefaultScenario, Geometry) {
  const Scenario sc = default_scenario();
  ASSERT_EQ(sc.num_bs(), 2);
  ASSERT_EQ(sc.num_targets(), 2);
  const double h = std::sqrt(3.0);
  EXPECT_NEAR(sc.bs_positions[0].x(), h / 2, 1e-15);
  EXPECT_NEAR(sc.bs_positions[1].x(), -h / 2, 1e-15);
  EXPECT_NEAR(sc.targets[0].center.x(), h / 4, 1e-15);
  EXPECT_NEAR(sc.targets[0].center.y(), 0.75, 1e-15);
  EXPECT_NEAR(sc.targets[0].radius, 0.03, 1e-15);
  EXPECT_NEAR(sc.targets[1].center.x(), 0.0, 1e-15);
  EXPECT_NEAR(sc.targets[1].radius, 0.048, 1e-15);
  EXPECT_NO_THROW(sc.validate());
}

TEST(DefaultScenario, HexagonalLayoutSpacing) {
  const auto sites = hexagonal_sites();
  ASSERT_EQ(sites.size(), 7u);
  const Vec2 center = sites[2];
  for (int i = 0; i < 7; ++i) {
    if (i == 2) continue;
    EXPECT_NEAR((sites[i] - center).norm(), std::sqrt(3.0), 1e-12) << i;
  }
  EXPECT_NEAR((sites[0] - sites[1]).norm(), std::sqrt(3.0), 1e-12);
}

TEST(Validate, RejectsBadConfigurations) {
  Scenario sc = default_scenario();
  sc.power_budget.pop_back();
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = default_scenario();
  sc.noise_power = 0.0;
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = default_scenario();
  sc.targets[0].radius = -1.0;
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = default_scenario();
  sc.fronthaul_cap[1] = 0.0;
  EXPECT_THROW(sc.validate(), ConfigError);
  sc = default_scenario();
  sc.mc_samples = 0;
  EXPECT_THROW(sc.validate(), ConfigError);
}

TEST(Sampling, DeterministicFromSeed) {
  const Scenario sc = default_scenario();
  const SampleSet a = draw_samples(sc);
  const SampleSet b = draw_samples(sc);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (int k = 0; k < sc.num_targets(); ++k) EXPECT_EQ(a.samples[s].positions[k], b.samples[s].positions[k]);
    EXPECT_EQ((a.samples[s].a[0] - b.samples[s].a[0]).norm(), 0.0);
  }
}

TEST(Sampling, TinyRadiusSitsOnCenters) {
  Scenario sc = default_scenario();
  for (auto& t : sc.targets) t.radius = 1e-12;
  sc.mc_samples = 1;
  const SampleSet set = draw_samples(sc);
  for (int k = 0; k < sc.num_targets(); ++k) {
    EXPECT_LT((set.samples[0].positions[k] - sc.targets[k].center).norm(), 1e-10);
  }
}

TEST(Sampling, SampleMeanConverges) {
  Scenario sc = default_scenario();
  sc.mc_samples = 10000;
  std::mt19937_64 rng(5);
  const SampleSet set = draw_samples(sc, rng);
  for (int k = 0; k < sc.num_targets(); ++k) {
    Vec2 mean = Vec2::Zero();
    for (const auto& s : set.samples) mean += s.positions[k];
    mean /= static_cast<double>(set.size());
    const double bound = 3.0 * sc.targets[k].radius / std::sqrt(static_cast<double>(set.size()));
    EXPECT_LT(std::abs(mean.x() - sc.targets[k].center.x()), bound);
    EXPECT_LT(std::abs(mean.y() - sc.targets[k].center.y()), bound);
  }
}

TEST(Sampling, ImpossiblePriorFailsCleanly) {
  Scenario sc = default_scenario();
  // Target pinned on top of a BS: every draw is degenerate.
  sc.targets[0].center = sc.bs_positions[0];
  sc.targets[0].radius = 1e-15;
  sc.attenuation = Attenuation(2, 2);
  sc.mc_samples = 1;
  EXPECT_THROW(draw_samples(sc), SamplingFailed);
}

TEST(Sampling, DerivedGeometryIsConsistent) {
  const Scenario sc = default_scenario();
  const SampleSet set = draw_samples(sc);
  const Sample& s = set.samples[0];
  for (int n = 0; n < sc.num_bs(); ++n) {
    for (int k = 0; k < sc.num_targets(); ++k) {
      const double th = angle_between(sc.bs_positions[n], s.positions[k]);
      EXPECT_EQ(s.theta(n, k), th);
      EXPECT_LT((s.a[n].col(k) - steering(th, sc.mr)).norm(), 1e-14);
      EXPECT_LT((s.dv[n].col(k) - steering_derivative(th, sc.mt)).norm(), 1e-14);
    }
  }
}

TEST(Attenuation, RadarEquationMagnitude) {
  const Scenario sc = default_scenario();
  const double four_pi3 = std::pow(4.0 * kPi, 3);
  for (int n = 0; n < 2; ++n) {
    for (int u = 0; u < 2; ++u) {
      for (int k = 0; k < 2; ++k) {
        const double drx = 1e3 * (sc.targets[k].center - sc.bs_positions[n]).norm();
        const double dtx = 1e3 * (sc.targets[k].center - sc.bs_positions[u]).norm();
        const double expect = sc.wavelength_m * sc.wavelength_m * sc.rcs_m2 / (four_pi3 * drx * drx * dtx * dtx);
        EXPECT_NEAR(std::norm(sc.attenuation(n, u, k)) / expect, 1.0, 1e-12);
      }
    }
  }
}

TEST(Attenuation, DistanceScaling) {
  Scenario sc = default_scenario();
  const double before = std::norm(sc.attenuation(0, 0, 0));
  for (auto& p : sc.bs_positions) p *= 2.0;
  for (auto& t : sc.targets) t.center *= 2.0;
  refresh_attenuation(sc);
  EXPECT_NEAR(std::norm(sc.attenuation(0, 0, 0)) * 16.0 / before, 1.0, 1e-12);
}

TEST(Attenuation, SymmetricGeometryGivesEqualMagnitudes) {
  const Scenario sc = default_scenario();
  // Target 1 sits on the symmetry axis between the two BSs.
  EXPECT_NEAR(std::abs(sc.attenuation(0, 0, 1)), std::abs(sc.attenuation(1, 1, 1)), 1e-20);
  EXPECT_NEAR(std::abs(sc.attenuation(0, 1, 1)), std::abs(sc.attenuation(1, 0, 1)), 1e-20);
}

TEST(Attenuation, ReproduciblePhases) {
  Scenario a = default_scenario();
  Scenario b = default_scenario();
  EXPECT_EQ(a.attenuation(1, 0, 1), b.attenuation(1, 0, 1));
  b.rng_seed += 1;
  refresh_attenuation(b);
  EXPECT_NE(std::arg(a.attenuation(1, 0, 1)), std::arg(b.attenuation(1, 0, 1)));
}

TEST(Sample, ChannelIsSumOfRankOneTerms) {
  const Scenario sc = default_scenario();
  const SampleSet set = draw_samples(sc);
  const Sample& s = set.samples[0];
  CMat g = CMat::Zero(sc.mr, sc.mt);
  for (int k = 0; k < sc.num_targets(); ++k) {
    g += s.b(0, 1, k) * s.a[0].col(k) * s.v[1].col(k).transpose();
  }
  EXPECT_LT((g - s.channel(0, 1)).norm(), 1e-12 * g.norm());
}

}  // namespace
