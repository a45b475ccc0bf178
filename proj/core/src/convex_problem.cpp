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

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "netsense/convex.hpp"

namespace netsense::convex {

int SdpProblem::add_hermitian(const std::string& name, int dim) {
  if (dim < 1) throw BuilderError("Hermitian variable needs a positive dimension");
  blocks_.push_back({name, num_vars_, dim * dim, dim});
  num_vars_ += dim * dim;
  return static_cast<int>(blocks_.size()) - 1;
}

int SdpProblem::add_scalar(const std::string& name) {
  blocks_.push_back({name, num_vars_, 1, 0});
  num_vars_ += 1;
  return static_cast<int>(blocks_.size()) - 1;
}

std::vector<LinearTerm> SdpProblem::trace_terms(int block, const CMat& w) const {
  const Block& b = blocks_.at(block);
  if (b.dim == 0 || w.rows() != b.dim || w.cols() != b.dim) throw BuilderError("trace_terms: size mismatch");
  const linalg::HermitianBasis basis(b.dim);
  const Vec c = basis.trace_coefficients(w);
  std::vector<LinearTerm> out;
  for (int k = 0; k < basis.size(); ++k) {
    if (c(k) != 0.0) out.push_back({b.offset + k, c(k)});
  }
  return out;
}

CMat SdpProblem::hermitian_value(int block, const Vec& x) const {
  const Block& b = blocks_.at(block);
  if (b.dim == 0) throw BuilderError("hermitian_value: block is scalar");
  const linalg::HermitianBasis basis(b.dim);
  return basis.to_matrix(std::span<const double>(x.data() + b.offset, b.size));
}

void SdpProblem::set_hermitian(int block, const CMat& value, Vec& x) const {
  const Block& b = blocks_.at(block);
  if (b.dim == 0) throw BuilderError("set_hermitian: block is scalar");
  const linalg::HermitianBasis basis(b.dim);
  x.segment(b.offset, b.size) = basis.to_params(value);
}

void SdpProblem::set_objective(std::vector<LinearTerm> terms, double constant) {
  check_terms(terms, "objective");
  objective_ = std::move(terms);
  objective_constant_ = constant;
}

void SdpProblem::add_linear(LinearConstraint c) {
  check_terms(c.terms, "linear constraint " + c.name);
  linear_.push_back(std::move(c));
}

void SdpProblem::add_lmi(LmiConstraint c) {
  check_lmi(c);
  lmis_.push_back(std::move(c));
}

void SdpProblem::add_logdet(LogDetConstraint c) {
  check_terms(c.terms, "logdet constraint " + c.name);
  check_lmi(c.arg);
  if (!(c.weight > 0.0)) throw BuilderError("logdet weight must be positive");
  logdets_.push_back(std::move(c));
}

void SdpProblem::add_schur_group(SchurGroup g) {
  const int d = g.dim();
  if (g.constant.cols() != d) throw BuilderError("Schur group: constant must be square");
  if (g.vars.size() != g.coefs.size()) throw BuilderError("Schur group: one coefficient per variable");
  if (g.rows.size() != g.border.size() || g.rows.size() != g.t_vars.size()) {
    throw BuilderError("Schur group: rows, borders and t variables must match");
  }
  for (int v : g.vars) {
    if (v < 0 || v >= num_vars_) throw BuilderError("Schur group: variable index out of range");
  }
  for (int v : g.t_vars) {
    if (v < 0 || v >= num_vars_) throw BuilderError("Schur group: t index out of range");
  }
  if (g.shift_var >= num_vars_) throw BuilderError("Schur group: shift index out of range");
  for (int r : g.rows) {
    if (r < 0 || r >= d) throw BuilderError("Schur group: row out of range");
  }
  for (const auto& c : g.coefs) {
    if (c.rows() != d || c.cols() != d) throw BuilderError("Schur group: coefficient size mismatch");
  }
  schur_.push_back(std::move(g));
}

LmiConstraint SdpProblem::block_lmi(int block, double scale, const CMat& constant, const std::string& name) const {
  const Block& b = blocks_.at(block);
  if (b.dim == 0) throw BuilderError("block_lmi: block is scalar");
  const linalg::HermitianBasis basis(b.dim);
  LmiConstraint c;
  c.name = name;
  c.dim = b.dim;
  c.constant = constant.size() ? constant : CMat::Zero(b.dim, b.dim);
  for (int k = 0; k < basis.size(); ++k) {
    auto e = basis.entries(k);
    for (auto& en : e) en.value *= scale;
    c.vars.push_back(b.offset + k);
    c.coefs.push_back(std::move(e));
  }
  return c;
}

void SdpProblem::add_psd(int block) { add_lmi(block_lmi(block, 1.0, CMat(), blocks_.at(block).name + ">=0")); }

void SdpProblem::add_trace_le(int block, double bound) {
  const Block& b = blocks_.at(block);
  LinearConstraint c;
  c.name = "tr(" + b.name + ")<=";
  for (int i = 0; i < b.dim; ++i) c.terms.push_back({b.offset + i, 1.0});
  c.constant = -bound;
  add_linear(std::move(c));
}

void SdpProblem::check_terms(const std::vector<LinearTerm>& terms, const std::string& what) const {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_vars_) throw BuilderError(what + ": variable index out of range");
    if (!std::isfinite(t.coef)) throw BuilderError(what + ": non-finite coefficient");
  }
}

void SdpProblem::check_lmi(const LmiConstraint& c) const {
  if (c.dim < 1 || c.constant.rows() != c.dim || c.constant.cols() != c.dim) {
    throw BuilderError("LMI " + c.name + ": bad constant size");
  }
  if (c.vars.size() != c.coefs.size()) throw BuilderError("LMI " + c.name + ": one coefficient per variable");
  if ((c.constant - c.constant.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + c.constant.cwiseAbs().maxCoeff())) {
    throw BuilderError("LMI " + c.name + ": constant not Hermitian");
  }
  for (int v : c.vars) {
    if (v < 0 || v >= num_vars_) throw BuilderError("LMI " + c.name + ": variable index out of range");
  }
  for (const auto& e : c.coefs) {
    for (const auto& en : e) {
      if (en.row < 0 || en.row >= c.dim || en.col < 0 || en.col >= c.dim) {
        throw BuilderError("LMI " + c.name + ": entry out of range");
      }
    }
  }
}

void SdpProblem::validate() const {
  check_terms(objective_, "objective");
  for (const auto& c : linear_) check_terms(c.terms, c.name);
  for (const auto& c : lmis_) check_lmi(c);
  for (const auto& c : logdets_) check_lmi(c.arg);
}

namespace {

// Real embedding [Re, -Im; Im, Re] of a sparse Hermitian coefficient,
// upper-triangle entries only (SDPA convention).
void emit_complex(std::ostream& out, int mat, int blk, int dim, const std::vector<Entry>& entries) {
  std::map<std::pair<int, int>, double> acc;
  auto put = [&](int i, int j, double v) {
    if (i > j) std::swap(i, j);
    acc[{i, j}] += v;
  };
  for (const auto& e : entries) {
    if (e.row > e.col) continue;  // each Hermitian pair emitted once from the upper entry
    const double re = e.value.real();
    const double im = e.value.imag();
    put(e.row, e.col, re);
    put(dim + e.row, dim + e.col, re);
    // lower-left Im block at (dim + row, col) and its mirror (dim + col, row) = -Im
    if (im != 0.0) {
      put(dim + e.row, e.col, im);
      if (e.row != e.col) put(dim + e.col, e.row, -im);
    }
  }
  for (const auto& [ij, v] : acc) {
    if (v != 0.0) out << mat << ' ' << blk << ' ' << ij.first + 1 << ' ' << ij.second + 1 << ' ' << v << '\n';
  }
}

std::vector<Entry> dense_entries(const CMat& m) {
  std::vector<Entry> e;
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j) != cd(0.0, 0.0)) e.push_back({i, j, m(i, j)});
    }
  }
  return e;
}

}  // namespace

void SdpProblem::write_sdpa(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  out << "* netsense SDP dump: minimize c'x s.t. sum_i x_i F_i - F_0 >= 0\n";
  out << "* complex blocks embedded as [Re -Im; Im Re]\n";
  for (const auto& c : logdets_) out << "* omitted log-det constraint: " << c.name << '\n';
  std::vector<int> sizes;
  int n_lin = 0;
  for (const auto& c : linear_) n_lin += c.equality ? 2 : 1;
  for (const auto& c : lmis_) sizes.push_back(2 * c.dim);
  for (const auto& c : logdets_) sizes.push_back(2 * c.arg.dim);
  for (const auto& g : schur_) {
    for (std::size_t i = 0; i < g.rows.size(); ++i) sizes.push_back(g.dim() + 1);
  }
  const bool has_lp = n_lin > 0;
  out << num_vars_ << '\n' << sizes.size() + (has_lp ? 1 : 0) << '\n';
  for (int s : sizes) out << s << ' ';
  if (has_lp) out << -n_lin;
  out << '\n';
  Vec c = Vec::Zero(num_vars_);
  for (const auto& t : objective_) c(t.var) += t.coef;
  for (int i = 0; i < num_vars_; ++i) out << c(i) << (i + 1 < num_vars_ ? ' ' : '\n');

  int blk = 1;
  auto emit_lmi = [&](const LmiConstraint& l) {
    // sum x F_i - F_0 >= 0 with F_0 = -constant
    emit_complex(out, 0, blk, l.dim, dense_entries(-l.constant));
    for (std::size_t a = 0; a < l.vars.size(); ++a) emit_complex(out, l.vars[a] + 1, blk, l.dim, l.coefs[a]);
    ++blk;
  };
  for (const auto& l : lmis_) emit_lmi(l);
  for (const auto& l : logdets_) emit_lmi(l.arg);
  for (const auto& g : schur_) {
    const int d = g.dim();
    for (std::size_t i = 0; i < g.rows.size(); ++i) {
      for (int r = 0; r < d; ++r) {
        for (int q = r; q < d; ++q) {
          if (g.constant(r, q) != 0.0) out << 0 << ' ' << blk << ' ' << r + 1 << ' ' << q + 1 << ' ' << -g.constant(r, q) << '\n';
        }
      }
      out << 0 << ' ' << blk << ' ' << g.rows[i] + 1 << ' ' << d + 1 << ' ' << -g.border[i] << '\n';
      for (std::size_t a = 0; a < g.vars.size(); ++a) {
        for (int r = 0; r < d; ++r) {
          for (int q = r; q < d; ++q) {
            if (g.coefs[a](r, q) != 0.0) {
              out << g.vars[a] + 1 << ' ' << blk << ' ' << r + 1 << ' ' << q + 1 << ' ' << g.coefs[a](r, q) << '\n';
            }
          }
        }
      }
      out << g.t_vars[i] + 1 << ' ' << blk << ' ' << d + 1 << ' ' << d + 1 << ' ' << 1.0 << '\n';
      if (g.shift_var >= 0) out << g.shift_var + 1 << ' ' << blk << ' ' << d + 1 << ' ' << d + 1 << ' ' << 1.0 << '\n';
      ++blk;
    }
  }
  if (has_lp) {
    int row = 1;
    for (const auto& l : linear_) {
      // -(terms + constant) >= 0, equalities as a pair
      for (int sign : {1, -1}) {
        if (sign == -1 && !l.equality) break;
        if (l.constant != 0.0) out << 0 << ' ' << blk << ' ' << row << ' ' << row << ' ' << sign * l.constant << '\n';
        for (const auto& t : l.terms) out << t.var + 1 << ' ' << blk << ' ' << row << ' ' << row << ' ' << -sign * t.coef << '\n';
        ++row;
      }
    }
  }
  if (!out) throw IoError("write failed for " + path);
}

AffineFim probe_affine(const std::function<Mat(const Vec&)>& map, int num_params, std::mt19937_64& rng, double tol) {
  AffineFim af;
  af.constant = map(Vec::Zero(num_params));
  af.coeffs.reserve(num_params);
  for (int k = 0; k < num_params; ++k) {
    Vec e = Vec::Zero(num_params);
    e(k) = 1.0;
    af.coeffs.push_back(map(e) - af.constant);
  }
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 2; ++trial) {
    Vec x(num_params);
    for (int k = 0; k < num_params; ++k) x(k) = nd(rng);
    const Mat direct = map(x);
    const Mat model = af.evaluate(x);
    double scale = direct.norm() + af.constant.norm();
    for (int k = 0; k < num_params; ++k) scale += std::abs(x(k)) * af.coeffs[k].norm();
    if ((direct - model).norm() > tol * std::max(scale, 1e-300)) {
      throw BuilderError("map is not affine in its parameters");
    }
  }
  return af;
}

SchurGroup schur_pcrb_lmis(const AffineFim& map, const std::vector<int>& param_vars, const std::vector<int>& t_vars,
                           int num_targets, const SchurOptions& options) {
  const int d = static_cast<int>(map.constant.rows());
  const int p = 2 * num_targets;
  if (map.constant.cols() != d) throw BuilderError("schur_pcrb_lmis: map constant must be square");
  if (static_cast<int>(param_vars.size()) != map.size()) throw BuilderError("schur_pcrb_lmis: one variable per map parameter");
  if (static_cast<int>(t_vars.size()) != p || p > d) throw BuilderError("schur_pcrb_lmis: need 2K t variables");
  auto check_sym = [&](const Mat& m) {
    if (m.rows() != d || m.cols() != d || !m.allFinite()) throw BuilderError("schur_pcrb_lmis: bad coefficient");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + m.cwiseAbs().maxCoeff())) {
      throw BuilderError("schur_pcrb_lmis: coefficient not symmetric");
    }
  };
  check_sym(map.constant);
  for (const auto& c : map.coeffs) check_sym(c);

  const Mat ref = options.reference.size() ? map.evaluate(options.reference) : map.constant;
  Vec dscale(d);
  for (int i = 0; i < d; ++i) dscale(i) = ref(i, i) > 0.0 ? 1.0 / std::sqrt(ref(i, i)) : 1.0;

  SchurGroup g;
  g.name = "pcrb-schur";
  g.constant = dscale.asDiagonal() * map.constant * dscale.asDiagonal();
  for (int a = 0; a < map.size(); ++a) {
    if (map.coeffs[a].cwiseAbs().maxCoeff() == 0.0) continue;
    g.vars.push_back(param_vars[a]);
    g.coefs.push_back(dscale.asDiagonal() * map.coeffs[a] * dscale.asDiagonal());
  }
  for (int i = 0; i < p; ++i) {
    const double ts = options.t_scale.size() ? options.t_scale(i) : 1.0;
    if (!(ts > 0.0)) throw BuilderError("schur_pcrb_lmis: t scale must be positive");
    g.rows.push_back(i);
    g.border.push_back(dscale(i) / std::sqrt(ts));
    g.t_vars.push_back(t_vars[i]);
  }
  return g;
}

}  // namespace netsense::convex
