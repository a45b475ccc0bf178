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

#include <vector>

#include "netsense/scenario.hpp"

namespace netsense {

/// Strict-PD floor added to Q when comparing rates of designs whose Q is
/// allowed to touch zero (relative to the noise power).
inline constexpr double kRateQFloor = 1e-10;

/// J_n = sum_u G_{n,u} R_u G_{n,u}^H for one sample. With a combiner C the
/// reduced covariance C^H J_n C is returned.
CMat aggregate_signal(const Sample& s, const std::vector<CMat>& r, int n, const CMat* combiner = nullptr);

/// Sample average of log2|J_n + N0 + Q_n| - log2|Q_n| with N0 = sigma^2 I,
/// or sigma^2 C^H C when a combiner is given. Throws RateUnbounded when
/// Q_n is not positive definite.
double rate_D(const SampleSet& set, const std::vector<CMat>& r, const CMat& q, int n,
              const CMat* combiner = nullptr);

/// rate_D with Q_n + kRateQFloor * sigma^2 I.
double rate_D_floored(const SampleSet& set, const std::vector<CMat>& r, const CMat& q, int n,
                      const CMat* combiner = nullptr);

/// Linearization of the concave log-det term in R around Rtilde:
/// value(R) = constant + (1/ln 2) sum_u Re tr(w[u] R_u).
struct RateLinearR {
  std::vector<CMat> w;
  double constant = 0.0;
  double evaluate(const std::vector<CMat>& r) const;
};

RateLinearR surrogate_Dhat_linear(const SampleSet& set, const std::vector<CMat>& r_tilde, const CMat& q, int n,
                                  const CMat* combiner = nullptr);

/// Upper bound of rate_D that is affine in R and tight at R = Rtilde.
double surrogate_Dhat(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& r_tilde,
                      const CMat& q, int n, const CMat* combiner = nullptr);

/// Rate in the inverse parameterization T_n = (N0 + Q_n)^{-1}:
/// mean log2|I + J^{1/2} T J^{1/2}| - log2|I - N0 T|. Throws RateUnbounded
/// unless 0 < T and N0 T < I strictly.
double rate_D_T(const SampleSet& set, const std::vector<CMat>& r, const CMat& t, int n,
                const CMat* combiner = nullptr);

/// Linearization of the concave term in T around Tbar, in units where
/// T' = sigma^2 T and J' = J / sigma^2:
/// value(T') = constant + (1/ln 2) Re tr(w T') - log2|I - N0' T'|,
/// with N0' = I (or C^H C).
struct RateLinearT {
  CMat w;
  CMat n0;
  double constant = 0.0;
  double noise_power = 1.0;
  /// Evaluates at a physical T; RateUnbounded when I - N0 T is not PD.
  double evaluate(const CMat& t) const;
};

RateLinearT surrogate_Dtilde_linear(const SampleSet& set, const std::vector<CMat>& r_bar, const CMat& t_bar, int n,
                                    const CMat* combiner = nullptr);

double surrogate_Dtilde(const SampleSet& set, const std::vector<CMat>& r_bar, const CMat& t_bar, const CMat& t,
                        int n, const CMat* combiner = nullptr);

/// Q = T^{-1} - N0 and its inverse map.
CMat q_from_t(const CMat& t, double noise_power, const CMat* combiner = nullptr);
CMat t_from_q(const CMat& q, double noise_power, const CMat* combiner = nullptr);

}  // namespace netsense
