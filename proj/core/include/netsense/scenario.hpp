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

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "netsense/types.hpp"

namespace netsense {

/// Isotropic Gaussian location prior N(center, radius^2 I), in km.
struct GaussianPrior {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
};

/// Complex round-trip attenuation b[n][u][k]: transmit BS u, target k,
/// receive BS n.
class Attenuation {
 public:
  Attenuation() = default;
  Attenuation(int num_bs, int num_targets)
      : num_bs_(num_bs), num_targets_(num_targets),
        data_(static_cast<std::size_t>(num_bs) * num_bs * num_targets, cd(0.0, 0.0)) {}

  int num_bs() const { return num_bs_; }
  int num_targets() const { return num_targets_; }
  bool empty() const { return data_.empty(); }

  cd& operator()(int n, int u, int k) { return data_[index(n, u, k)]; }
  cd operator()(int n, int u, int k) const { return data_[index(n, u, k)]; }

  /// Diagonal of B_{n,u} as a K-vector.
  CVec row(int n, int u) const;

 private:
  std::size_t index(int n, int u, int k) const {
    return (static_cast<std::size_t>(n) * num_bs_ + u) * num_targets_ + k;
  }
  int num_bs_ = 0;
  int num_targets_ = 0;
  std::vector<cd> data_;
};

struct Scenario {
  std::vector<Vec2> bs_positions;  // km
  std::vector<GaussianPrior> targets;
  int mt = 4;
  int mr = 4;
  double wavelength_m = 0.1;
  double noise_power = 0.0;  // W
  double rcs_m2 = 1.0;
  std::vector<double> power_budget;   // W, per BS
  std::vector<double> fronthaul_cap;  // bits per sample, per BS; +inf allowed
  int mc_samples = 50;
  std::uint64_t rng_seed = 1;
  Attenuation attenuation;

  int num_bs() const { return static_cast<int>(bs_positions.size()); }
  int num_targets() const { return static_cast<int>(targets.size()); }

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

double dbm_to_watt(double dbm);
double noise_power_from_psd(double psd_dbm_per_hz, double bandwidth_hz);

/// Angle of the target seen from the BS, measured from the array broadside
/// (the +y axis) towards +x: atan2(dx, dy), folded into (-pi, pi].
double angle_between(const Vec2& bs_pos, const Vec2& target_pos);

/// d(theta)/d(q) = [d/dq^x, d/dq^y] in rad per km.
Vec2 angle_jacobian(const Vec2& bs_pos, const Vec2& target_pos);

enum class ArrayKind { transmit, receive };

/// Half-wavelength ULA response, element m = exp(j pi m sin(theta)).
CVec steering(double theta, int num_elements, ArrayKind kind = ArrayKind::receive);
CVec steering_derivative(double theta, int num_elements);
CMat steering_matrix(const std::vector<double>& thetas, int num_elements);
CMat steering_derivative_matrix(const std::vector<double>& thetas, int num_elements);

/// One Monte-Carlo draw of all target positions with the derived geometry.
struct Sample {
  std::vector<Vec2> positions;  // K
  Mat theta;                    // N x K
  std::vector<Mat> jacobian;    // per BS, 2 x K; column k is u_{n,k}
  std::vector<CMat> a;          // per BS, Mr x K
  std::vector<CMat> da;         // per BS, Mr x K
  std::vector<CMat> v;          // per BS, Mt x K
  std::vector<CMat> dv;         // per BS, Mt x K
  Attenuation b;

  int num_bs() const { return static_cast<int>(a.size()); }
  int num_targets() const { return static_cast<int>(positions.size()); }

  /// G_{n,u} = A_n diag(b_{n,u}) V_u^T, Mr x Mt.
  CMat channel(int n, int u) const;
};

struct SampleSet {
  int num_bs = 0;
  int num_targets = 0;
  int mt = 0;
  int mr = 0;
  double noise_power = 0.0;
  std::vector<GaussianPrior> priors;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

/// Builds the derived geometry for explicit target positions. Throws
/// DegenerateGeometry when a target coincides with a BS.
Sample make_sample(const Scenario& scenario, const std::vector<Vec2>& positions);

/// S i.i.d. draws from the product of the priors. Draws that put a target on
/// top of a BS are redrawn; SamplingFailed after too many retries.
SampleSet draw_samples(const Scenario& scenario, std::mt19937_64& rng);
SampleSet draw_samples(const Scenario& scenario);

/// Radar-equation magnitudes at the prior centers with uniform random phase.
Attenuation gen_attenuation(const Scenario& scenario, std::mt19937_64& rng);

/// Two BSs at (+-sqrt(3)/2, 0) km and two targets, desk-scale array sizes.
Scenario default_scenario();

/// BS sites of the 7-cell hexagonal layout (adjacent sites sqrt(3) km
/// apart); the first two coincide with the default pair.
std::vector<Vec2> hexagonal_sites();

/// The five target priors used for target-count sweeps.
std::vector<GaussianPrior> extended_targets();

/// Recomputes the attenuation tensor from the scenario seed.
void refresh_attenuation(Scenario& scenario);

}  // namespace netsense
