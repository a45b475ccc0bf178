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

#include <string>
#include <vector>

#include "netsense/ebc.hpp"
#include "netsense/optimizer.hpp"

namespace netsense {

enum class Scheme {
  alg3,    // alternating optimization of R and Q
  bench1,  // uniform quantization Q = qI at the cap, R by SCA
  bench2,  // R = (Pbar/Mt) I fixed, Q by SCA
  bench3,  // infinite fronthaul: Q = 0, single SDP over R
  ebc,     // estimate, beamform with E_r, compress
  bench4,  // EBC with 2K-1 columns of E_r
  bench5,  // EBC with E_r plus one orthogonal vector
  bench6,  // EBC with 2K DFT columns
  bench7,  // EBC without reduction (C = I)
};

const char* to_string(Scheme s);
/// ConfigError for unknown names.
Scheme scheme_from_string(const std::string& s);
bool is_ebc_scheme(Scheme s);
std::vector<Scheme> all_schemes();

struct RunOptions {
  OptimizerOptions optimizer;
  MusicOptions music;
};

struct ResultRow {
  std::string axis;
  double value = 0.0;
  Scheme scheme = Scheme::alg3;
  double pcrb = 0.0;
  double apcrb = 0.0;  // pcrb / K
  int outer_iters = 0;
  double wall_ms = 0.0;
  std::string status;  // "ok", the optimizer flags, or "error: ..."
};

/// Runs one scheme on a fixed sample set. Failures do not throw; they come
/// back as a row with a NaN PCRB and an error status.
ResultRow run_scheme(Scheme scheme, const Scenario& scenario, const SampleSet& set, const RunOptions& options = {});

/// Valid axes: power_dbm, fronthaul_bits, num_targets, num_bs, Mt, Mr.
bool is_valid_axis(const std::string& axis);
/// Sets one axis value and regenerates the attenuation tensor. num_targets
/// takes a prefix of extended_targets(), num_bs a prefix of
/// hexagonal_sites() (new BSs copy the first BS's budgets).
void apply_axis(Scenario& scenario, const std::string& axis, double value);

/// Mt = 8, Mr = 16 as in the full-size simulations.
void apply_full_scale(Scenario& scenario);

struct SweepSpec {
  std::string axis;
  std::vector<double> values;
  std::vector<Scheme> schemes;
  std::string scenario_path;
  std::string output_path;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

/// JSON object with keys axis, values, schemes, scenario, output and an
/// optional threads. Relative scenario paths resolve against `base_dir`.
SweepSpec parse_sweep_spec(const std::string& json_text, const std::string& base_dir = "");
SweepSpec load_sweep_spec(const std::string& path);

/// One row per (value, scheme) in value-major order. Points run in a pool;
/// schemes within a point run sequentially on one shared sample set.
std::vector<ResultRow> sweep(const SweepSpec& spec, const Scenario& base, const RunOptions& options = {});

/// Header axis,value,scheme,pcrb,apcrb,outer_iters,wall_ms,status. With
/// timing off wall_ms is written as 0 so reruns compare byte for byte.
std::string rows_to_csv(const std::vector<ResultRow>& rows, bool timing = true);

}  // namespace netsense
