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
#include <string>
#include <vector>

#include "netsense/scenario.hpp"

namespace netsense::verify {

struct SuiteResult {
  std::string name;
  bool passed = false;
  double metric = 0.0;     // worst observed value of the suite's error measure
  double tolerance = 0.0;  // pass when metric <= tolerance
  int cases = 0;
  double seconds = 0.0;
  std::string detail;
};

/// Hermitian positive definite test matrix X X^H + floor I with Gaussian X.
CMat random_hpd(int dim, std::mt19937_64& rng, double floor = 0.1);

/// N = 2, K = 2 instance with Mt = Mr = 3, one sample, random Gaussian
/// attenuations and unit noise power. Targets are drawn in front of the BSs.
Scenario random_small_scenario(std::mt19937_64& rng);

/// Small scenario with a random geometry and budgets whose optimum is
/// data-limited (large RCS) so the optimizers have work to do.
Scenario random_design_scenario(std::mt19937_64& rng, int mt = 3, int mr = 3, int samples = 5);

/// Block assembly, element-wise formulas and finite differences agree
/// pairwise (scaled relative Frobenius error).
SuiteResult fim_agreement(int instances, double tol, std::uint64_t seed);

/// Same comparison with the FIM mutation enabled; passes when the
/// corruption is detected on every instance.
SuiteResult mutation_smoke(int instances, double tol, std::uint64_t seed);

/// Rate surrogates are tangent at the expansion point (absolute gap in
/// bits) and majorize the rate on random feasible perturbations.
SuiteResult surrogate_contracts(int perturbations, double tangency_tol, std::uint64_t seed);

/// PCRB with C = E_r(theta) and Q'' = 0 matches C = I, and is unchanged by
/// C -> C L for random nonsingular L (relative error).
SuiteResult combiner_invariance(int instances, double tol, std::uint64_t seed);

/// Objective traces of the transmit, compression and alternating
/// optimizers never increase by more than the relative slack.
SuiteResult descent(int scenarios, double slack, std::uint64_t seed);

/// For a fixed PD F the Schur SDP returns sum_i [F^{-1}]_ii over the
/// position block (relative error).
SuiteResult schur_lmi(int instances, double tol, std::uint64_t seed);

struct VerifyOptions {
  std::uint64_t seed = 2024;
  int fim_instances = 20;
  int surrogate_perturbations = 100;
  int invariance_instances = 5;
  int descent_scenarios = 3;
  int schur_instances = 10;
};

std::vector<SuiteResult> run_all(const VerifyOptions& options = {});

/// One line per suite; returns true when all passed.
bool print_report(const std::vector<SuiteResult>& results, std::ostream& os);

}  // namespace netsense::verify
