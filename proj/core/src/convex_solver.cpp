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
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "netsense/convex.hpp"

namespace netsense::convex {

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::optimal:
      return "optimal";
    case SolverStatus::infeasible:
      return "infeasible";
    case SolverStatus::max_iter:
      return "max_iter";
    case SolverStatus::numerical:
      return "numerical";
  }
  return "unknown";
}

SolverOptions SolverOptions::from_env() {
  SolverOptions o;
  if (const char* g = std::getenv("NETSENSE_SOLVER_GAP")) {
    const double v = std::atof(g);
    if (v > 0.0) o.gap_tol = v;
  }
  if (const char* f = std::getenv("NETSENSE_SOLVER_FEAS")) {
    const double v = std::atof(f);
    if (v > 0.0) o.feas_tol = v;
  }
  return o;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMat lmi_matrix(const LmiConstraint& c, const Vec& x) {
  CMat f = c.constant;
  for (std::size_t a = 0; a < c.vars.size(); ++a) {
    const double xa = x(c.vars[a]);
    if (xa == 0.0) continue;
    for (const auto& e : c.coefs[a]) f(e.row, e.col) += xa * e.value;
  }
  return f;
}

Mat schur_matrix(const SchurGroup& g, const Vec& x) {
  Mat f = g.constant;
  for (std::size_t a = 0; a < g.vars.size(); ++a) {
    const double xa = x(g.vars[a]);
    if (xa != 0.0) f += xa * g.coefs[a];
  }
  return f;
}

double linear_value(const std::vector<LinearTerm>& terms, double constant, const Vec& x) {
  double v = constant;
  for (const auto& t : terms) v += t.coef * x(t.var);
  return v;
}

double corner(const SchurGroup& g, std::size_t i, const Vec& x) {
  return x(g.t_vars[i]) + (g.shift_var >= 0 ? x(g.shift_var) : 0.0);
}

// Local index set with scatter into the global gradient / Hessian.
struct LocalIndex {
  std::vector<int> vars;
  std::unordered_map<int, int> pos;
  int add(int v) {
    auto it = pos.find(v);
    if (it != pos.end()) return it->second;
    const int p = static_cast<int>(vars.size());
    vars.push_back(v);
    pos.emplace(v, p);
    return p;
  }
  int size() const { return static_cast<int>(vars.size()); }
};

void scatter(const LocalIndex& li, const Vec& g, const Mat& h, Vec& grad, Mat& hess) {
  for (int a = 0; a < li.size(); ++a) {
    grad(li.vars[a]) += g(a);
    for (int b = 0; b < li.size(); ++b) hess(li.vars[a], li.vars[b]) += h(a, b);
  }
}

// Gradient tr(G F_a) and Hessian tr(G F_a G F_b) of logdet for an LMI, local
// to c.vars (duplicates allowed).
void lmi_derivatives(const LmiConstraint& c, const Eigen::LLT<CMat>& llt, Vec& tr_g, Mat& k) {
  const int nv = static_cast<int>(c.vars.size());
  const int d = c.dim;
  tr_g.setZero(nv);
  k.setZero(nv, nv);
  std::size_t nnz = 0;
  for (const auto& e : c.coefs) nnz += e.size();
  const bool dense = nv > 0 && nnz > static_cast<std::size_t>(nv) * 8;
  if (!dense) {
    const CMat g = llt.solve(CMat::Identity(d, d));
    for (int a = 0; a < nv; ++a) {
      cd acc = 0.0;
      for (const auto& e : c.coefs[a]) acc += g(e.col, e.row) * e.value;
      tr_g(a) = acc.real();
    }
    for (int a = 0; a < nv; ++a) {
      for (int b = a; b < nv; ++b) {
        cd acc = 0.0;
        for (const auto& ea : c.coefs[a]) {
          for (const auto& eb : c.coefs[b]) acc += ea.value * eb.value * g(ea.col, eb.row) * g(eb.col, ea.row);
        }
        k(a, b) = acc.real();
        k(b, a) = acc.real();
      }
    }
    return;
  }
  const CMat l = llt.matrixL();
  CMat bm(d * d, nv);
  for (int a = 0; a < nv; ++a) {
    CMat fa = CMat::Zero(d, d);
    for (const auto& e : c.coefs[a]) fa(e.row, e.col) += e.value;
    CMat x = l.triangularView<Eigen::Lower>().solve(fa);
    CMat ba = l.triangularView<Eigen::Lower>().solve(x.adjoint()).adjoint();
    tr_g(a) = ba.trace().real();
    bm.col(a) = Eigen::Map<const CVec>(ba.data(), d * d);
  }
  k = (bm.adjoint() * bm).real();
}

class Barrier {
 public:
  explicit Barrier(const SdpProblem& p) : p_(p) {
    theta_ = 0.0;
    for (const auto& c : p.linear()) {
      if (!c.equality) theta_ += 1.0;
    }
    for (const auto& c : p.lmis()) theta_ += c.dim;
    for (const auto& c : p.logdets()) theta_ += 1.0 + c.arg.dim;
    for (const auto& g : p.schur_groups()) theta_ += static_cast<double>(g.rows.size()) * (g.dim() + 1);
  }

  double theta() const { return theta_; }

  /// Barrier value, +inf outside the open domain.
  double value(const Vec& x) const {
    double phi = 0.0;
    for (const auto& c : p_.linear()) {
      if (c.equality) continue;
      const double g = linear_value(c.terms, c.constant, x);
      if (!(g < 0.0)) return kInf;
      phi -= std::log(-g);
    }
    for (const auto& c : p_.lmis()) {
      Eigen::LLT<CMat> llt(lmi_matrix(c, x));
      const auto ld = logdet(llt);
      if (!ld) return kInf;
      phi -= *ld;
    }
    for (const auto& c : p_.logdets()) {
      Eigen::LLT<CMat> llt(lmi_matrix(c.arg, x));
      const auto ld = logdet(llt);
      if (!ld) return kInf;
      const double g = linear_value(c.terms, c.constant, x) - c.weight * *ld;
      if (!(g < 0.0)) return kInf;
      phi -= std::log(-g) + *ld;
    }
    for (const auto& gr : p_.schur_groups()) {
      Eigen::LLT<Mat> llt(schur_matrix(gr, x));
      if (llt.info() != Eigen::Success) return kInf;
      const Mat& lm = llt.matrixLLT();
      double ld = 0.0;
      for (int i = 0; i < gr.dim(); ++i) {
        if (!(lm(i, i) > 0.0)) return kInf;
        ld += 2.0 * std::log(lm(i, i));
      }
      phi -= static_cast<double>(gr.rows.size()) * ld;
      for (std::size_t i = 0; i < gr.rows.size(); ++i) {
        Vec e = Vec::Zero(gr.dim());
        e(gr.rows[i]) = 1.0;
        const Vec w = llt.matrixL().solve(e);
        const double gam = corner(gr, i, x) - gr.border[i] * gr.border[i] * w.squaredNorm();
        if (!(gam > 0.0)) return kInf;
        phi -= std::log(gam);
      }
    }
    return std::isfinite(phi) ? phi : kInf;
  }

  /// Value, gradient and Hessian; false outside the domain.
  bool derivatives(const Vec& x, double& phi, Vec& grad, Mat& hess) const {
    const int n = static_cast<int>(x.size());
    grad.setZero(n);
    hess.setZero(n, n);
    phi = 0.0;
    for (const auto& c : p_.linear()) {
      if (c.equality) continue;
      const double g = linear_value(c.terms, c.constant, x);
      if (!(g < 0.0)) return false;
      phi -= std::log(-g);
      for (const auto& ta : c.terms) {
        grad(ta.var) += ta.coef / -g;
        for (const auto& tb : c.terms) hess(ta.var, tb.var) += ta.coef * tb.coef / (g * g);
      }
    }
    Vec tr_g;
    Mat k;
    for (const auto& c : p_.lmis()) {
      Eigen::LLT<CMat> llt(lmi_matrix(c, x));
      const auto ld = logdet(llt);
      if (!ld) return false;
      phi -= *ld;
      lmi_derivatives(c, llt, tr_g, k);
      for (std::size_t a = 0; a < c.vars.size(); ++a) {
        grad(c.vars[a]) -= tr_g(a);
        for (std::size_t b = 0; b < c.vars.size(); ++b) hess(c.vars[a], c.vars[b]) += k(a, b);
      }
    }
    for (const auto& c : p_.logdets()) {
      Eigen::LLT<CMat> llt(lmi_matrix(c.arg, x));
      const auto ld = logdet(llt);
      if (!ld) return false;
      const double g = linear_value(c.terms, c.constant, x) - c.weight * *ld;
      if (!(g < 0.0)) return false;
      phi -= std::log(-g) + *ld;
      lmi_derivatives(c.arg, llt, tr_g, k);
      LocalIndex li;
      for (int v : c.arg.vars) li.add(v);
      for (const auto& t : c.terms) li.add(t.var);
      const int m = li.size();
      Vec dg = Vec::Zero(m);
      Vec dld = Vec::Zero(m);
      Mat kl = Mat::Zero(m, m);
      for (std::size_t a = 0; a < c.arg.vars.size(); ++a) {
        const int pa = li.pos.at(c.arg.vars[a]);
        dld(pa) += tr_g(a);
        for (std::size_t b = 0; b < c.arg.vars.size(); ++b) kl(pa, li.pos.at(c.arg.vars[b])) += k(a, b);
      }
      for (const auto& t : c.terms) dg(li.pos.at(t.var)) += t.coef;
      dg -= c.weight * dld;
      // -log(-g) - logdet(H)
      const Vec gl = dg / -g - dld;
      const Mat hl = dg * dg.transpose() / (g * g) + kl * (c.weight / -g + 1.0);
      scatter(li, gl, hl, grad, hess);
    }
    for (const auto& gr : p_.schur_groups()) {
      if (!schur_derivatives(gr, x, phi, grad, hess)) return false;
    }
    return std::isfinite(phi);
  }

  /// Smallest slack over all inequality constraints (eigenvalue for LMIs).
  double min_slack(const Vec& x) const {
    double s = kInf;
    for (const auto& c : p_.linear()) {
      if (!c.equality) s = std::min(s, -linear_value(c.terms, c.constant, x));
    }
    for (const auto& c : p_.lmis()) s = std::min(s, linalg::min_eigenvalue(lmi_matrix(c, x)));
    for (const auto& c : p_.logdets()) {
      const CMat h = lmi_matrix(c.arg, x);
      const double me = linalg::min_eigenvalue(h);
      s = std::min(s, me);
      if (me > 0.0) {
        const auto ld = linalg::logdet_hpd(h);
        if (ld) s = std::min(s, -(linear_value(c.terms, c.constant, x) - c.weight * *ld));
      }
    }
    for (const auto& gr : p_.schur_groups()) {
      const Mat f = schur_matrix(gr, x);
      const double me = linalg::min_eigenvalue(f);
      s = std::min(s, me);
      if (me > 0.0) {
        const Mat g = f.inverse();
        for (std::size_t i = 0; i < gr.rows.size(); ++i) {
          s = std::min(s, corner(gr, i, x) - gr.border[i] * gr.border[i] * g(gr.rows[i], gr.rows[i]));
        }
      }
    }
    return s;
  }

 private:
  template <typename Llt>
  static std::optional<double> logdet(const Llt& llt) {
    if (llt.info() != Eigen::Success) return std::nullopt;
    const auto& l = llt.matrixLLT();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
      const double d = std::real(l(i, i));
      if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
      acc += 2.0 * std::log(d);
    }
    return acc;
  }

  bool schur_derivatives(const SchurGroup& gr, const Vec& x, double& phi, Vec& grad, Mat& hess) const {
    const int d = gr.dim();
    const int m = static_cast<int>(gr.rows.size());
    Eigen::LLT<Mat> llt(schur_matrix(gr, x));
    const auto ld = logdet(llt);
    if (!ld) return false;
    phi -= m * *ld;
    const Mat l = llt.matrixL();
    // Columns g_i = F^{-1} e_{r_i}
    Mat gcols(d, m);
    Vec gam(m);
    for (int i = 0; i < m; ++i) {
      Vec e = Vec::Zero(d);
      e(gr.rows[i]) = 1.0;
      gcols.col(i) = llt.solve(e);
      const double c2 = gr.border[i] * gr.border[i];
      gam(i) = corner(gr, i, x) - c2 * gcols(gr.rows[i], i);
      if (!(gam(i) > 0.0)) return false;
      phi -= std::log(gam(i));
    }
    LocalIndex li;
    for (int v : gr.vars) li.add(v);
    for (int v : gr.t_vars) li.add(v);
    if (gr.shift_var >= 0) li.add(gr.shift_var);
    const int nl = li.size();
    const int nv = static_cast<int>(gr.vars.size());
    Vec gl = Vec::Zero(nl);
    Mat hl = Mat::Zero(nl, nl);

    Mat bm(d * d, nv);
    Mat h(m, nv);             // h_ia = g_i^T F_a g_i
    std::vector<Mat> y(m, Mat(d, nv));  // y_ia = L^{-1} F_a g_i
    for (int a = 0; a < nv; ++a) {
      const Mat& fa = gr.coefs[a];
      const Mat xa = l.triangularView<Eigen::Lower>().solve(fa);
      const Mat ba = l.triangularView<Eigen::Lower>().solve(xa.transpose());
      bm.col(a) = Eigen::Map<const Vec>(ba.data(), d * d);
      const Mat fg = fa * gcols;
      const Mat lfg = l.triangularView<Eigen::Lower>().solve(fg);
      for (int i = 0; i < m; ++i) {
        h(i, a) = gcols.col(i).dot(fg.col(i));
        y[i].col(a) = lfg.col(i);
      }
      gl(li.pos.at(gr.vars[a])) -= m * ba.trace();
    }
    Mat kab = m * (bm.transpose() * bm);
    for (int i = 0; i < m; ++i) {
      const double c2 = gr.border[i] * gr.border[i];
      kab += (2.0 * c2 / gam(i)) * (y[i].transpose() * y[i]);
    }
    for (int a = 0; a < nv; ++a) {
      const int pa = li.pos.at(gr.vars[a]);
      for (int b = 0; b < nv; ++b) hl(pa, li.pos.at(gr.vars[b])) += kab(a, b);
    }
    for (int i = 0; i < m; ++i) {
      const double c2 = gr.border[i] * gr.border[i];
      Vec dgam = Vec::Zero(nl);
      for (int a = 0; a < nv; ++a) dgam(li.pos.at(gr.vars[a])) += c2 * h(i, a);
      dgam(li.pos.at(gr.t_vars[i])) += 1.0;
      if (gr.shift_var >= 0) dgam(li.pos.at(gr.shift_var)) += 1.0;
      gl -= dgam / gam(i);
      hl += dgam * dgam.transpose() / (gam(i) * gam(i));
    }
    scatter(li, gl, hl, grad, hess);
    return true;
  }

  const SdpProblem& p_;
  double theta_ = 0.0;
};

struct Equalities {
  Mat a;
  Vec b;
  Mat z;  // null-space basis (identity when there are no equalities)
};

Equalities equalities(const SdpProblem& p, int n) {
  Equalities eq;
  int m = 0;
  for (const auto& c : p.linear()) {
    if (c.equality) ++m;
  }
  eq.a = Mat::Zero(m, n);
  eq.b = Vec::Zero(m);
  int r = 0;
  for (const auto& c : p.linear()) {
    if (!c.equality) continue;
    for (const auto& t : c.terms) eq.a(r, t.var) += t.coef;
    eq.b(r) = -c.constant;
    ++r;
  }
  if (m == 0) {
    eq.z = Mat::Identity(n, n);
    return eq;
  }
  Eigen::JacobiSVD<Mat> svd(eq.a, Eigen::ComputeFullV);
  const double tol = 1e-12 * std::max(1.0, svd.singularValues().maxCoeff());
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > tol) ++rank;
  }
  eq.z = svd.matrixV().rightCols(n - rank);
  return eq;
}

Vec project_equalities(const Equalities& eq, const Vec& x) {
  if (eq.a.rows() == 0) return x;
  const Vec r = eq.b - eq.a * x;
  return x + eq.a.transpose() * (eq.a * eq.a.transpose()).completeOrthogonalDecomposition().solve(r);
}

bool trace_enabled() {
  static const bool on = std::getenv("NETSENSE_SOLVER_TRACE") != nullptr;
  return on;
}

struct PhaseResult {
  Vec x;
  double t = 1.0;
  int steps = 0;
  bool converged = false;
  bool numerical = false;
};

// Minimizes t c'x + phi(x) along the central path from a strictly feasible x.
// `stop` is polled after every Newton step.
template <typename Stop>
PhaseResult path_follow(const Barrier& bar, const Vec& c, const Equalities& eq, Vec x, double gap_tol,
                        double mu, int max_steps, Stop stop) {
  PhaseResult res;
  const int n = static_cast<int>(x.size());
  const double theta = std::max(bar.theta(), 1.0);
  Vec grad(n);
  Mat hess(n, n);
  double phi = 0.0;
  if (!bar.derivatives(x, phi, grad, hess)) {
    res.numerical = true;
    res.x = x;
    return res;
  }
  // Initial t from the best fit of t c + grad phi = 0 in the Hessian metric.
  double t = 1.0;
  {
    const Mat hz = eq.z.transpose() * hess * eq.z + 1e-14 * Mat::Identity(eq.z.cols(), eq.z.cols()) * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Mat> ldlt(hz);
    const Vec cz = eq.z.transpose() * c;
    const Vec gz = eq.z.transpose() * grad;
    const Vec hc = ldlt.solve(cz);
    const double num = -gz.dot(hc);
    const double den = cz.dot(hc);
    if (den > 0.0 && num > 0.0 && std::isfinite(num / den)) t = num / den;
    const double obj_scale = std::max(1.0, std::abs(c.dot(x)));
    t = std::clamp(t, 1e-3 * theta / obj_scale, 1e3 * theta / obj_scale);
  }
  int steps = 0;
  while (true) {
    // Centering; loose until the stage whose gap bound already meets the
    // tolerance.
    const bool last = theta / t <= gap_tol * std::max(1.0, std::abs(c.dot(x)));
    // The final accuracy is set by theta/t; lambda^2/t is negligible next to it.
    const double center_tol = last ? 1e-8 : 1e-3;
    double prev_lambda2 = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int inner = 0; inner < 200; ++inner) {
      if (steps >= max_steps) {
        res.x = x;
        res.t = t;
        res.steps = steps;
        return res;
      }
      if (!bar.derivatives(x, phi, grad, hess)) {
        res.numerical = true;
        res.x = x;
        res.t = t;
        res.steps = steps;
        return res;
      }
      const Vec g = t * c + grad;
      const bool reduced = eq.a.rows() > 0;
      const Mat hz = reduced ? Mat(eq.z.transpose() * hess * eq.z) : hess;
      const Vec gz = reduced ? Vec(eq.z.transpose() * g) : g;
      Vec dz;
      Eigen::LLT<Mat> llt(hz);
      if (llt.info() == Eigen::Success) {
        dz = -llt.solve(gz);
      } else {
        const double ridge = 1e-12 * (1.0 + hz.diagonal().cwiseAbs().maxCoeff());
        Eigen::LDLT<Mat> ldlt(hz + ridge * Mat::Identity(hz.rows(), hz.cols()));
        dz = -ldlt.solve(gz);
      }
      const Vec dx = reduced ? Vec(eq.z * dz) : dz;
      const double lambda2 = -gz.dot(dz);
      ++steps;
      if (!(lambda2 >= 0.0) || !std::isfinite(lambda2)) {
        res.numerical = true;
        res.x = x;
        res.t = t;
        res.steps = steps;
        return res;
      }
      if (lambda2 < center_tol) break;
      // Roundoff floor: the decrement stopped shrinking while already small.
      stalled = (lambda2 < 1e-4 && lambda2 > 0.5 * prev_lambda2) ? stalled + 1 : 0;
      prev_lambda2 = lambda2;
      if (stalled >= 5) break;
      // Damped Newton with feasibility backtracking and Armijo.
      const double f0 = t * c.dot(x) + phi;
      const double slope = g.dot(dx);
      double alpha = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        const Vec xn = x + alpha * dx;
        const double pv = bar.value(xn);
        if (std::isfinite(pv) && t * c.dot(xn) + pv <= f0 + 0.25 * alpha * slope) {
          x = xn;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (stop(x)) {
        res.x = x;
        res.t = t;
        res.steps = steps;
        res.converged = true;
        return res;
      }
      if (!moved) break;  // no progress possible at this t; treat as centered
    }
    const double gap = theta / t;
    const double scale = std::max(1.0, std::abs(c.dot(x)));
    if (trace_enabled()) {
      std::fprintf(stderr, "[solver] t=%.3e gap=%.3e obj=%.10e steps=%d\n", t, gap, c.dot(x), steps);
    }
    if (last && gap <= gap_tol * scale) {
      res.x = x;
      res.t = t;
      res.steps = steps;
      res.converged = true;
      return res;
    }
    if (!(gap <= gap_tol * scale)) t *= mu;
  }
}

// Phase-I problem: every inequality relaxed by s, hard bounds s >= -1 and |x_i| <= box.
SdpProblem phase_one_problem(const SdpProblem& p, double box, int& s_var) {
  SdpProblem q;
  for (const auto& b : p.blocks()) {
    if (b.dim > 0) {
      q.add_hermitian(b.name, b.dim);
    } else {
      q.add_scalar(b.name);
    }
  }
  s_var = q.block(q.add_scalar("phase1-s")).offset;
  q.set_objective({{s_var, 1.0}});
  for (auto c : p.linear()) {
    if (!c.equality) c.terms.push_back({s_var, -1.0});
    q.add_linear(std::move(c));
  }
  auto relax = [&](LmiConstraint c) {
    std::vector<Entry> id;
    for (int i = 0; i < c.dim; ++i) id.push_back({i, i, cd(1.0, 0.0)});
    c.vars.push_back(s_var);
    c.coefs.push_back(std::move(id));
    return c;
  };
  for (const auto& c : p.lmis()) q.add_lmi(relax(c));
  for (auto c : p.logdets()) {
    c.arg = relax(c.arg);
    c.terms.push_back({s_var, -1.0});
    q.add_logdet(std::move(c));
  }
  for (auto g : p.schur_groups()) {
    g.vars.push_back(s_var);
    g.coefs.push_back(Mat::Identity(g.dim(), g.dim()));
    if (g.shift_var >= 0) throw BuilderError("phase I: Schur group already shifted");
    g.shift_var = s_var;
    q.add_schur_group(std::move(g));
  }
  q.add_linear({"s>=-1", {{s_var, -1.0}}, -1.0, false});
  for (int i = 0; i < p.num_vars(); ++i) {
    q.add_linear({"box+", {{i, 1.0}}, -box, false});
    q.add_linear({"box-", {{i, -1.0}}, -box, false});
  }
  return q;
}

}  // namespace

SolverReport solve(const SdpProblem& problem, const SolverOptions& options) {
  problem.validate();
  SolverReport rep;
  const int n = problem.num_vars();
  const Barrier bar(problem);
  const Equalities eq = equalities(problem, n);
  Vec c = Vec::Zero(n);
  for (const auto& t : problem.objective()) c(t.var) += t.coef;

  Vec x0 = options.start && options.start->size() == n ? *options.start : Vec::Zero(n);
  x0 = project_equalities(eq, x0);
  if (eq.a.rows() > 0 && (eq.a * x0 - eq.b).norm() > options.feas_tol * (1.0 + eq.b.norm())) {
    rep.status = SolverStatus::infeasible;
    rep.message = "equality constraints are inconsistent";
    rep.x = x0;
    return rep;
  }

  Vec x = x0;
  if (!std::isfinite(bar.value(x))) {
    int s_var = -1;
    const SdpProblem p1 = phase_one_problem(problem, options.box, s_var);
    const Barrier bar1(p1);
    Equalities eq1 = equalities(p1, n + 1);
    Vec z(n + 1);
    z.head(n) = x0.cwiseMax(-0.5 * options.box).cwiseMin(0.5 * options.box);
    double s = 1.0;
    for (; s < 1e30; s *= 2.0) {
      z(n) = s;
      if (std::isfinite(bar1.value(z))) break;
    }
    if (!(s < 1e30)) {
      rep.status = SolverStatus::numerical;
      rep.message = "phase I could not find a starting slack";
      rep.x = x0;
      return rep;
    }
    Vec c1 = Vec::Zero(n + 1);
    c1(n) = 1.0;
    const double margin = 1e-3;
    PhaseResult r1 = path_follow(bar1, c1, eq1, z, 1e-10, options.mu, options.max_newton,
                                 [&](const Vec& zz) { return zz(n) < -margin; });
    rep.phase1_steps = r1.steps;
    const double s_final = r1.x(n);
    x = r1.x.head(n);
    if (!(s_final < 0.0) || !std::isfinite(bar.value(x))) {
      rep.x = x;
      rep.newton_steps = r1.steps;
      if (r1.numerical) {
        rep.status = SolverStatus::numerical;
        rep.message = "phase I numerical failure";
      } else if (!r1.converged) {
        rep.status = SolverStatus::max_iter;
        rep.message = "phase I iteration limit";
      } else {
        rep.status = SolverStatus::infeasible;
        rep.message = "no strictly feasible point (phase I optimum " + std::to_string(s_final) + ")";
      }
      rep.min_slack = bar.min_slack(x);
      return rep;
    }
  }

  PhaseResult r2 = path_follow(bar, c, eq, x, options.gap_tol, options.mu, options.max_newton - rep.phase1_steps,
                               [](const Vec&) { return false; });
  rep.x = r2.x;
  rep.newton_steps = rep.phase1_steps + r2.steps;
  rep.objective = c.dot(r2.x) + problem.objective_constant();
  rep.gap = std::max(bar.theta(), 1.0) / r2.t;
  rep.residual = eq.a.rows() ? (eq.a * r2.x - eq.b).norm() : 0.0;
  rep.min_slack = bar.min_slack(r2.x);
  if (r2.converged) {
    rep.status = SolverStatus::optimal;
  } else if (r2.numerical) {
    rep.status = SolverStatus::numerical;
    rep.message = "Newton step failed";
  } else {
    rep.status = SolverStatus::max_iter;
    rep.message = "Newton iteration limit";
  }
  if (!std::isfinite(rep.objective)) {
    rep.status = SolverStatus::numerical;
    rep.message = "non-finite objective";
  }
  return rep;
}

}  // namespace netsense::convex
