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
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "netsense/fim.hpp"
#include "netsense/linalg.hpp"

namespace netsense::convex {

using Entry = linalg::HermitianBasis::Entry;

/// coef * x[var]
struct LinearTerm {
  int var;
  double coef;
};

/// constant + sum_a x[vars[a]] * coefs[a] >= 0 (Hermitian, sparse coefficients).
struct LmiConstraint {
  std::string name;
  int dim = 0;
  CMat constant;
  std::vector<int> vars;
  std::vector<std::vector<Entry>> coefs;
};

/// sum terms + constant <= 0, or == 0 when equality is set.
struct LinearConstraint {
  std::string name;
  std::vector<LinearTerm> terms;
  double constant = 0.0;
  bool equality = false;
};

/// sum terms + constant - weight * logdet(arg) <= 0 with arg > 0.
/// Convex since -logdet of an affine Hermitian matrix is convex.
struct LogDetConstraint {
  std::string name;
  std::vector<LinearTerm> terms;
  double constant = 0.0;
  double weight = 1.0;
  LmiConstraint arg;
};

/// Family of LMIs [F(x), c_i e_{r_i}; c_i e_{r_i}^T, x[t_i] + x[shift]] >= 0
/// sharing one real symmetric F(x) = constant + sum_a x[vars[a]] coefs[a].
/// The shift term is absent when shift_var < 0.
struct SchurGroup {
  std::string name;
  Mat constant;
  std::vector<int> vars;
  std::vector<Mat> coefs;
  std::vector<int> rows;
  std::vector<double> border;
  std::vector<int> t_vars;
  int shift_var = -1;
  int dim() const { return static_cast<int>(constant.rows()); }
};

class SdpProblem {
 public:
  struct Block {
    std::string name;
    int offset = 0;
    int size = 0;
    int dim = 0;  // Hermitian dimension, 0 for scalars
  };

  /// Hermitian matrix variable parameterized by HermitianBasis(dim).
  int add_hermitian(const std::string& name, int dim);
  int add_scalar(const std::string& name);

  int num_vars() const { return num_vars_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(int id) const { return blocks_.at(id); }

  /// Terms of Re tr(W X) for Hermitian block X.
  std::vector<LinearTerm> trace_terms(int block, const CMat& w) const;
  /// Extracts the Hermitian value of a block from a solution vector.
  CMat hermitian_value(int block, const Vec& x) const;
  /// Parameter vector that encodes the given Hermitian value for a block.
  void set_hermitian(int block, const CMat& value, Vec& x) const;

  void set_objective(std::vector<LinearTerm> terms, double constant = 0.0);
  void add_linear(LinearConstraint c);
  void add_lmi(LmiConstraint c);
  void add_logdet(LogDetConstraint c);
  void add_schur_group(SchurGroup g);

  /// lower + scale * X >= 0 for Hermitian block X (lower may be empty = 0).
  LmiConstraint block_lmi(int block, double scale, const CMat& constant, const std::string& name) const;
  void add_psd(int block);
  /// tr(X) <= bound
  void add_trace_le(int block, double bound);

  const std::vector<LinearTerm>& objective() const { return objective_; }
  double objective_constant() const { return objective_constant_; }
  const std::vector<LinearConstraint>& linear() const { return linear_; }
  const std::vector<LmiConstraint>& lmis() const { return lmis_; }
  const std::vector<LogDetConstraint>& logdets() const { return logdets_; }
  const std::vector<SchurGroup>& schur_groups() const { return schur_; }

  /// Throws BuilderError for inconsistent dimensions or indices.
  void validate() const;

  /// Writes an SDPA-style sparse file with complex blocks embedded as real
  /// symmetric blocks of doubled size. Log-det constraints have no conic
  /// form there and are listed as comments.
  void write_sdpa(const std::string& path) const;

 private:
  void check_terms(const std::vector<LinearTerm>& terms, const std::string& what) const;
  void check_lmi(const LmiConstraint& c) const;

  int num_vars_ = 0;
  std::vector<Block> blocks_;
  std::vector<LinearTerm> objective_;
  double objective_constant_ = 0.0;
  std::vector<LinearConstraint> linear_;
  std::vector<LmiConstraint> lmis_;
  std::vector<LogDetConstraint> logdets_;
  std::vector<SchurGroup> schur_;
};

enum class SolverStatus { optimal, infeasible, max_iter, numerical };

const char* to_string(SolverStatus s);

struct SolverOptions {
  double gap_tol = 1e-7;        // relative duality gap
  double feas_tol = 1e-8;       // equality residual
  double mu = 16.0;             // barrier parameter growth
  int max_newton = 800;         // total Newton steps across both phases
  double box = 1e6;             // |x_i| bound used by phase I only
  std::optional<Vec> start;     // optional strictly feasible start
  /// Reads NETSENSE_SOLVER_GAP / NETSENSE_SOLVER_FEAS when set.
  static SolverOptions from_env();
};

struct SolverReport {
  SolverStatus status = SolverStatus::numerical;
  double objective = 0.0;
  Vec x;
  double gap = 0.0;            // barrier bound on the duality gap
  double residual = 0.0;       // equality residual at x
  double min_slack = 0.0;      // smallest constraint slack at x (>0 strictly feasible)
  int newton_steps = 0;
  int phase1_steps = 0;
  std::string message;
  bool ok() const { return status == SolverStatus::optimal; }
};

SolverReport solve(const SdpProblem& problem, const SolverOptions& options = SolverOptions::from_env());

/// Builds an affine map by probing a black-box map at 0 and unit vectors;
/// BuilderError when a random combination disagrees with the affine model.
AffineFim probe_affine(const std::function<Mat(const Vec&)>& map, int num_params, std::mt19937_64& rng,
                       double tol = 1e-8);

struct SchurOptions {
  Vec reference;  // parameter point for Jacobi scaling; empty -> constant term
  Vec t_scale;    // t_i represents [F^{-1}]_{ii} / t_scale_i; empty -> ones
};

/// One Schur LMI per position coordinate of the PFIM map, sharing F. With
/// D the Jacobi scaling at the reference, the group encodes
/// t_i >= [F^{-1}]_{ii} / t_scale_i using D F D. Throws BuilderError when
/// sizes disagree or a coefficient is not symmetric and finite.
SchurGroup schur_pcrb_lmis(const AffineFim& map, const std::vector<int>& param_vars, const std::vector<int>& t_vars,
                           int num_targets, const SchurOptions& options = {});

}  // namespace netsense::convex
