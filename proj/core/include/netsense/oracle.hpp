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

#include <functional>
#include <random>
#include <vector>

#include "netsense/fim.hpp"

namespace netsense::oracle {

struct FdConfig {
  double angle_step = 1e-6;  // rad
  double b_step = 1e-6;      // relative to the largest |b|
};

/// Real FIM of zeta by central differences of the mean map
/// mu_m(zeta) = sum_v A_m B_{m,v} V_v^T x_v, with x_u = R_u^{1/2} e_j for
/// every column j and the other BSs silent. O holds the noise covariances.
Mat fim_finite_difference(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& o,
                          const FdConfig& cfg = {});

/// Complex blocks E[d mu^H O^{-1} d mu] over (theta, b^R) built element by
/// element from explicit channel derivatives:
/// sum_v tr(dG_{m,v}/dzeta_i^H O_m^{-1} dG_{m,v}/dzeta_j R_v).
struct ElementwiseBlocks {
  CMat f1, f2, f3;
};
ElementwiseBlocks fim_elementwise(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& o);

/// Relative gap between x^H (A o B) y and tr(diag(x)^H A diag(y) B^T) for
/// random complex inputs of size m.
double hadamard_identity_gap(int m, std::mt19937_64& rng);

/// || A - B ||_F / max(||A||_F, ||B||_F) after scaling both by D A D with
/// D = diag(A)^{-1/2} (entries with zero diagonal are left unscaled).
double scaled_relative_error(const Mat& a, const Mat& b);

/// Monte-Carlo estimate of E[grad log p grad log p^T] for the Gaussian priors.
Mat prior_fim_monte_carlo(const std::vector<GaussianPrior>& priors, int num_bs, int samples, std::mt19937_64& rng);

struct MiniResult {
  double objective = 0.0;
  Vec argmin;
  long evaluations = 0;
};

/// Coarse-to-fine exhaustive grid over a box; non-finite values are treated
/// as infeasible. Each refinement shrinks the box around the incumbent.
MiniResult grid_minimize(const std::function<double(const Vec&)>& f, const Vec& lo, const Vec& hi, int points,
                         int refinements);

/// N = 1 transmit problem: minimize PCRB over a 2x2 Hermitian PSD R with
/// tr R <= power (and rate <= rate_cap when finite), Q fixed.
struct MiniTransmitProblem {
  const SampleSet* set = nullptr;
  CMat q;
  double power = 1.0;
  double rate_cap = 0.0;  // <= 0 or inf: no rate constraint
};
MiniResult grid_search_transmit(const MiniTransmitProblem& p, int points = 25, int refinements = 7);

/// Scalar compression problem: Q_n = q_n (Mr = 1) per BS, minimize PCRB
/// subject to rate_n <= rate_cap[n].
struct MiniCompressProblem {
  const SampleSet* set = nullptr;
  std::vector<CMat> r;
  std::vector<double> rate_cap;
  double q_max = 1e3;  // in units of sigma^2
};
MiniResult grid_search_compress(const MiniCompressProblem& p, int points = 201, int refinements = 8);

}  // namespace netsense::oracle
