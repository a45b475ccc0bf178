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

#include <limits>
#include <string>
#include <vector>

#include "netsense/convex.hpp"
#include "netsense/scenario.hpp"

namespace netsense {

/// Everything the optimizer needs besides the design itself.
struct DesignContext {
  const SampleSet* set = nullptr;
  std::vector<double> power;  // W per BS
  std::vector<double> cap;    // bits per sample per BS, +inf for no limit
  /// Reduced receive model: y' = C_n^H y. Q then lives in the Lr space.
  const std::vector<CMat>* combiners = nullptr;

  int num_bs() const { return set->num_bs; }
  int rx_dim() const;
  const CMat* combiner(int n) const { return combiners ? &(*combiners)[n] : nullptr; }
};

DesignContext make_context(const Scenario& scenario, const SampleSet& set,
                           const std::vector<CMat>* combiners = nullptr);

struct DesignPoint {
  std::vector<CMat> r;
  std::vector<CMat> q;
  double objective = std::numeric_limits<double>::infinity();  // PCRB
  std::vector<double> rates;
  bool q_clamped = false;
};

/// Receive weighting O^{-1} = (N0 + Q)^{-1} for each BS.
std::vector<CMat> weighting(const DesignContext& ctx, const std::vector<CMat>& q);

double evaluate_pcrb(const DesignContext& ctx, const std::vector<CMat>& r, const std::vector<CMat>& q);
std::vector<double> evaluate_rates(const DesignContext& ctx, const std::vector<CMat>& r, const std::vector<CMat>& q);
/// Fills objective and rates.
void evaluate(const DesignContext& ctx, DesignPoint& p);

/// Largest relative violation of the power and rate constraints and of
/// R, Q >= 0 (zero when feasible).
double max_violation(const DesignContext& ctx, const DesignPoint& p);

struct OptimizerOptions {
  double eps_sca = 1e-4;
  double eps_ao = 1e-4;
  int max_inner = 30;
  int max_outer = 20;
  double init_rate_fraction = 0.95;
  convex::SolverOptions solver = convex::SolverOptions::from_env();
};

struct TraceEntry {
  int iter = 0;
  char phase = 'I';  // I(nit), R, Q
  double objective = 0.0;
  double max_violation = 0.0;
  std::string solver_status;
};

struct OptimizerReport {
  std::vector<TraceEntry> trace;       // one entry per accepted SCA step plus the start
  std::vector<double> outer_objective; // objective after each AO iteration (index 0 = start)
  std::vector<int> inner_iterations;   // SCA steps per subproblem call
  std::vector<double> outer_wall_ms;   // wall time of each AO iteration
  int outer_iterations = 0;
  long newton_steps = 0;               // interior-point steps over all SDPs
  long phase1_steps = 0;               // part of newton_steps spent finding a start
  int sdp_solves = 0;
  int rejected_steps = 0;              // SDP steps that would have increased the PCRB
  double max_rejected_increase = 0.0;  // relative
  std::string termination;
  std::vector<std::string> flags;
  DesignPoint final;
};

/// Scalar q with rate_D(R, q I) equal to the target, by bisection in log q.
/// Returns +inf q flagged through `failed` when no finite q reaches it.
double bisect_uniform_q(const DesignContext& ctx, const std::vector<CMat>& r, int n, double target_bits,
                        bool* failed = nullptr);

/// R_n = (Pbar_n / Mt) I, Q_n = q_n I at rate fraction * Dbar_n
/// (Q = 0 when the capacity is infinite).
DesignPoint init_feasible(const DesignContext& ctx, double rate_fraction = 0.95,
                          std::vector<std::string>* flags = nullptr);

/// Algorithm I: SCA over R with Q fixed.
DesignPoint sca_transmit(const DesignContext& ctx, const DesignPoint& start, const OptimizerOptions& opt,
                         OptimizerReport* report = nullptr);

/// Algorithm II: SCA over T = (N0 + Q)^{-1} with R fixed.
DesignPoint sca_compress(const DesignContext& ctx, const DesignPoint& start, const OptimizerOptions& opt,
                         OptimizerReport* report = nullptr);

/// Algorithm III: alternate the two until the outer decrease stalls.
OptimizerReport alternate(const DesignContext& ctx, const OptimizerOptions& opt = {});
OptimizerReport alternate_from(const DesignContext& ctx, const DesignPoint& start, const OptimizerOptions& opt = {});

/// Single SDP: optimal R with Q fixed and no rate constraint.
DesignPoint solve_transmit_unconstrained(const DesignContext& ctx, const std::vector<CMat>& q,
                                         const OptimizerOptions& opt, OptimizerReport* report = nullptr);

/// Scales R down (all BSs by one factor) until every rate fits; returns
/// false when nothing had to change.
bool restore_rates_by_power(const DesignContext& ctx, DesignPoint& p);
/// Raises Q_n by multiples of sigma^2 I until rate_n fits.
bool restore_rates_by_noise(const DesignContext& ctx, DesignPoint& p);

void write_report_csv(const std::string& path, const OptimizerReport& report);

}  // namespace netsense
