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

#include "netsense/scenario.hpp"

#include <cmath>
#include <numbers>

namespace netsense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinSeparationKm = 1e-6;
constexpr int kMaxRedraws = 1000;

}  // namespace

CVec Attenuation::row(int n, int u) const {
  CVec r(num_targets_);
  for (int k = 0; k < num_targets_; ++k) r(k) = (*this)(n, u, k);
  return r;
}

void Scenario::validate() const {
  const int n = num_bs();
  const int k = num_targets();
  if (n < 1) throw ConfigError("scenario needs at least one BS");
  if (k < 1) throw ConfigError("scenario needs at least one target");
  if (mt < 1 || mr < 1) throw ConfigError("antenna counts must be positive");
  if (!(noise_power > 0.0)) throw ConfigError("noise power must be positive");
  if (!(wavelength_m > 0.0)) throw ConfigError("wavelength must be positive");
  if (mc_samples < 1) throw ConfigError("mc_samples must be at least 1");
  if (static_cast<int>(power_budget.size()) != n) throw ConfigError("power budget needs one entry per BS");
  if (static_cast<int>(fronthaul_cap.size()) != n) throw ConfigError("fronthaul capacity needs one entry per BS");
  for (double p : power_budget) {
    if (!(p > 0.0)) throw ConfigError("power budgets must be positive");
  }
  for (double d : fronthaul_cap) {
    if (!(d > 0.0)) throw ConfigError("fronthaul capacities must be positive");
  }
  for (const auto& t : targets) {
    if (!(t.radius > 0.0)) throw ConfigError("prior radius must be positive");
  }
  if (!attenuation.empty() && (attenuation.num_bs() != n || attenuation.num_targets() != k)) {
    throw ConfigError("attenuation tensor must have shape N x N x K");
  }
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double noise_power_from_psd(double psd_dbm_per_hz, double bandwidth_hz) {
  return std::pow(10.0, (psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz) - 30.0) / 10.0);
}

double angle_between(const Vec2& bs_pos, const Vec2& target_pos) {
  const double dx = target_pos.x() - bs_pos.x();
  const double dy = target_pos.y() - bs_pos.y();
  if (dx == 0.0 && dy == 0.0) throw DegenerateGeometry("target coincides with BS");
  double theta = std::atan2(dx, dy);
  if (theta <= -kPi) theta += 2.0 * kPi;
  return theta;
}

Vec2 angle_jacobian(const Vec2& bs_pos, const Vec2& target_pos) {
  const double dx = target_pos.x() - bs_pos.x();
  const double dy = target_pos.y() - bs_pos.y();
  if (dx == 0.0 && dy == 0.0) throw DegenerateGeometry("target coincides with BS");
  if (dx != 0.0 && dy != 0.0) {
    const double tan_t = dx / dy;
    const double cot_t = dy / dx;
    return Vec2(1.0 / ((1.0 + tan_t * tan_t) * dy), -1.0 / ((1.0 + cot_t * cot_t) * dx));
  }
  // tan or cot is infinite; use the equivalent rational form.
  const double r2 = dx * dx + dy * dy;
  return Vec2(dy / r2, -dx / r2);
}

CVec steering(double theta, int num_elements, ArrayKind /*kind*/) {
  CVec s(num_elements);
  const double phase = kPi * std::sin(theta);
  for (int m = 0; m < num_elements; ++m) s(m) = std::polar(1.0, phase * m);
  return s;
}

CVec steering_derivative(double theta, int num_elements) {
  CVec s(num_elements);
  const double phase = kPi * std::sin(theta);
  const double c = kPi * std::cos(theta);
  for (int m = 0; m < num_elements; ++m) s(m) = cd(0.0, c * m) * std::polar(1.0, phase * m);
  return s;
}

CMat steering_matrix(const std::vector<double>& thetas, int num_elements) {
  CMat a(num_elements, static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t k = 0; k < thetas.size(); ++k) a.col(k) = steering(thetas[k], num_elements);
  return a;
}

CMat steering_derivative_matrix(const std::vector<double>& thetas, int num_elements) {
  CMat a(num_elements, static_cast<Eigen::Index>(thetas.size()));
  for (std::size_t k = 0; k < thetas.size(); ++k) a.col(k) = steering_derivative(thetas[k], num_elements);
  return a;
}

CMat Sample::channel(int n, int u) const {
  return a[n] * b.row(n, u).asDiagonal() * v[u].transpose();
}

Sample make_sample(const Scenario& scenario, const std::vector<Vec2>& positions) {
  const int n_bs = scenario.num_bs();
  const int k_t = static_cast<int>(positions.size());
  Sample s;
  s.positions = positions;
  s.theta.resize(n_bs, k_t);
  s.jacobian.resize(n_bs);
  s.a.resize(n_bs);
  s.da.resize(n_bs);
  s.v.resize(n_bs);
  s.dv.resize(n_bs);
  for (int n = 0; n < n_bs; ++n) {
    std::vector<double> th(k_t);
    s.jacobian[n].resize(2, k_t);
    for (int k = 0; k < k_t; ++k) {
      const Vec2& bs = scenario.bs_positions[n];
      if ((positions[k] - bs).norm() < kMinSeparationKm) throw DegenerateGeometry("target too close to BS");
      th[k] = angle_between(bs, positions[k]);
      s.theta(n, k) = th[k];
      s.jacobian[n].col(k) = angle_jacobian(bs, positions[k]);
    }
    s.a[n] = steering_matrix(th, scenario.mr);
    s.da[n] = steering_derivative_matrix(th, scenario.mr);
    s.v[n] = steering_matrix(th, scenario.mt);
    s.dv[n] = steering_derivative_matrix(th, scenario.mt);
  }
  s.b = scenario.attenuation.empty() ? Attenuation(n_bs, k_t) : scenario.attenuation;
  return s;
}

SampleSet draw_samples(const Scenario& scenario, std::mt19937_64& rng) {
  scenario.validate();
  SampleSet set;
  set.num_bs = scenario.num_bs();
  set.num_targets = scenario.num_targets();
  set.mt = scenario.mt;
  set.mr = scenario.mr;
  set.noise_power = scenario.noise_power;
  set.priors = scenario.targets;
  set.samples.reserve(scenario.mc_samples);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < scenario.mc_samples; ++s) {
    bool drawn = false;
    for (int attempt = 0; attempt < kMaxRedraws && !drawn; ++attempt) {
      std::vector<Vec2> pos;
      pos.reserve(scenario.targets.size());
      for (const auto& prior : scenario.targets) {
        const double zx = normal(rng);
        const double zy = normal(rng);
        pos.emplace_back(prior.center + prior.radius * Vec2(zx, zy));
      }
      try {
        set.samples.push_back(make_sample(scenario, pos));
        drawn = true;
      } catch (const DegenerateGeometry&) {
        // redraw
      }
    }
    if (!drawn) throw SamplingFailed("could not draw a non-degenerate target configuration");
  }
  return set;
}

SampleSet draw_samples(const Scenario& scenario) {
  std::mt19937_64 rng(scenario.rng_seed);
  return draw_samples(scenario, rng);
}

Attenuation gen_attenuation(const Scenario& scenario, std::mt19937_64& rng) {
  const int n_bs = scenario.num_bs();
  const int k_t = scenario.num_targets();
  Attenuation b(n_bs, k_t);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  const double four_pi_cubed = std::pow(4.0 * kPi, 3);
  for (int n = 0; n < n_bs; ++n) {
    for (int u = 0; u < n_bs; ++u) {
      for (int k = 0; k < k_t; ++k) {
        const double d_rx = 1e3 * (scenario.targets[k].center - scenario.bs_positions[n]).norm();
        const double d_tx = 1e3 * (scenario.targets[k].center - scenario.bs_positions[u]).norm();
        if (d_rx <= 0.0 || d_tx <= 0.0) throw DegenerateGeometry("prior center coincides with a BS");
        const double gain2 = scenario.wavelength_m * scenario.wavelength_m * scenario.rcs_m2 /
                             (four_pi_cubed * d_tx * d_tx * d_rx * d_rx);
        b(n, u, k) = std::polar(std::sqrt(gain2), phase(rng));
      }
    }
  }
  return b;
}

void refresh_attenuation(Scenario& scenario) {
  // Offset the stream so attenuation phases are independent of the position draws.
  std::mt19937_64 rng(scenario.rng_seed ^ 0x9e3779b97f4a7c15ULL);
  scenario.attenuation = gen_attenuation(scenario, rng);
}

std::vector<Vec2> hexagonal_sites() {
  const double h = std::sqrt(3.0);
  return {Vec2(h / 2, 0.0),   Vec2(-h / 2, 0.0), Vec2(0.0, 1.5),    Vec2(h, 1.5),
          Vec2(-h, 1.5),      Vec2(h / 2, 3.0),  Vec2(-h / 2, 3.0)};
}

std::vector<GaussianPrior> extended_targets() {
  const double h = std::sqrt(3.0);
  return {{Vec2(h / 4, 0.75), 0.03},
          {Vec2(0.0, 0.75), 0.048},
          {Vec2(-h / 4, 0.75), 0.03},
          {Vec2(h / 4, h / 4), 0.03},
          {Vec2(-0.25, 0.5), 0.048}};
}

Scenario default_scenario() {
  Scenario sc;
  const auto sites = hexagonal_sites();
  sc.bs_positions = {sites[0], sites[1]};
  const auto tg = extended_targets();
  sc.targets = {tg[0], tg[1]};
  sc.mt = 4;
  sc.mr = 4;
  sc.wavelength_m = 0.1;
  sc.noise_power = noise_power_from_psd(-169.0, 1e6);
  sc.rcs_m2 = 1.0;
  sc.power_budget = {dbm_to_watt(31.0), dbm_to_watt(31.0)};
  sc.fronthaul_cap = {8.0, 8.0};
  sc.mc_samples = 20;
  sc.rng_seed = 2024;
  refresh_attenuation(sc);
  return sc;
}

}  // namespace netsense
