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

#include "netsense/optimizer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "netsense/fim.hpp"
#include "netsense/fronthaul.hpp"
#include "netsense/linalg.hpp"

namespace netsense {

namespace {

bool has_cap(double c) { return std::isfinite(c); }

double rate_tol(double cap) { return 1e-7 * (1.0 + std::abs(cap)); }

bool any_cap(const DesignContext& ctx) {
  return std::any_of(ctx.cap.begin(), ctx.cap.end(), [](double c) { return has_cap(c); });
}

bool rates_fit(const DesignContext& ctx, const std::vector<double>& rates) {
  for (int n = 0; n < ctx.num_bs(); ++n) {
    if (has_cap(ctx.cap[n]) && !(rates[n] <= ctx.cap[n] + rate_tol(ctx.cap[n]))) return false;
  }
  return true;
}

double rate_or_inf(const DesignContext& ctx, const std::vector<CMat>& r, const CMat& q, int n) {
  try {
    return rate_D(*ctx.set, r, q, n, ctx.combiner(n));
  } catch (const RateUnbounded&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// Normalized noise L L^H of the (possibly reduced) receive space.
CMat noise_shape(const DesignContext& ctx, int n) {
  const int d = ctx.rx_dim();
  if (const CMat* c = ctx.combiner(n)) return linalg::hermitize(c->adjoint() * *c);
  return CMat::Identity(d, d);
}

/// Q from T' = sigma^2 T with eigenvalues kept inside (0, 1) relative to
/// the noise shape.
CMat q_from_normalized_t(const DesignContext& ctx, int n, const CMat& tp, bool* clamped) {
  const double s2 = ctx.set->noise_power;
  const CMat n0 = noise_shape(ctx, n);
  const int d = static_cast<int>(tp.rows());
  if ((n0 - CMat::Identity(d, d)).norm() < 1e-10) {
    Eigen::SelfAdjointEigenSolver<CMat> es(linalg::hermitize(tp));
    Vec lam = es.eigenvalues();
    for (int i = 0; i < d; ++i) {
      const double c = std::clamp(lam(i), 1e-12, 1.0 - 1e-9);
      if (c != lam(i)) *clamped = true;
      lam(i) = s2 * (1.0 / c - 1.0);
    }
    return linalg::hermitize(es.eigenvectors() * lam.cast<cd>().asDiagonal() * es.eigenvectors().adjoint());
  }
  CMat q = q_from_t(tp / s2, s2, ctx.combiner(n));
  if (linalg::min_eigenvalue(q) < 1e-9 * s2) {
    *clamped = true;
    q = linalg::project_psd(q) + 1e-9 * s2 * CMat::Identity(d, d);
  }
  return q;
}

void push_trace(OptimizerReport* report, char phase, const DesignContext& ctx, const DesignPoint& p,
                const std::string& status) {
  if (!report) return;
  TraceEntry e;
  e.iter = static_cast<int>(report->trace.size());
  e.phase = phase;
  e.objective = p.objective;
  e.max_violation = max_violation(ctx, p);
  e.solver_status = status;
  report->trace.push_back(e);
}

void add_flag(OptimizerReport* report, const std::string& flag) {
  if (report && std::find(report->flags.begin(), report->flags.end(), flag) == report->flags.end()) {
    report->flags.push_back(flag);
  }
}

Vec position_scale(const Mat& f, int num_targets) {
  const Vec d = inverse_diagonal(f, 2 * num_targets, false);
  return d.head(2 * num_targets);
}

/// Outcome of comparing an SDP candidate against the incumbent.
bool accept_candidate(const DesignPoint& cur, const DesignPoint& cand, OptimizerReport* report) {
  if (std::isfinite(cand.objective) && cand.objective <= cur.objective * (1.0 + 1e-12)) return true;
  if (report) {
    ++report->rejected_steps;
    const double inc = std::isfinite(cand.objective) ? (cand.objective - cur.objective) / cur.objective
                                                     : std::numeric_limits<double>::infinity();
    report->max_rejected_increase = std::max(report->max_rejected_increase, inc);
  }
  return false;
}

}  // namespace

int DesignContext::rx_dim() const {
  return combiners ? static_cast<int>((*combiners)[0].cols()) : set->mr;
}

DesignContext make_context(const Scenario& scenario, const SampleSet& set, const std::vector<CMat>* combiners) {
  DesignContext ctx;
  ctx.set = &set;
  ctx.power = scenario.power_budget;
  ctx.cap = scenario.fronthaul_cap;
  ctx.combiners = combiners;
  if (static_cast<int>(ctx.power.size()) != set.num_bs || static_cast<int>(ctx.cap.size()) != set.num_bs) {
    throw ShapeError("make_context: one power budget and one capacity per BS");
  }
  if (combiners && static_cast<int>(combiners->size()) != set.num_bs) {
    throw ShapeError("make_context: one combiner per BS");
  }
  return ctx;
}

std::vector<CMat> weighting(const DesignContext& ctx, const std::vector<CMat>& q) {
  std::vector<CMat> out(q.size());
  for (std::size_t n = 0; n < q.size(); ++n) {
    out[n] = t_from_q(q[n], ctx.set->noise_power, ctx.combiner(static_cast<int>(n)));
  }
  return out;
}

double evaluate_pcrb(const DesignContext& ctx, const std::vector<CMat>& r, const std::vector<CMat>& q) {
  return pcrb(pfim_from_oinv(*ctx.set, r, weighting(ctx, q), ctx.combiners), ctx.set->num_targets);
}

std::vector<double> evaluate_rates(const DesignContext& ctx, const std::vector<CMat>& r,
                                   const std::vector<CMat>& q) {
  std::vector<double> out(ctx.num_bs());
  for (int n = 0; n < ctx.num_bs(); ++n) out[n] = rate_or_inf(ctx, r, q[n], n);
  return out;
}

void evaluate(const DesignContext& ctx, DesignPoint& p) {
  try {
    p.objective = evaluate_pcrb(ctx, p.r, p.q);
  } catch (const SingularFim&) {
    p.objective = std::numeric_limits<double>::infinity();
  }
  p.rates = evaluate_rates(ctx, p.r, p.q);
}

double max_violation(const DesignContext& ctx, const DesignPoint& p) {
  double v = 0.0;
  const double s2 = ctx.set->noise_power;
  for (int n = 0; n < ctx.num_bs(); ++n) {
    const double pw = ctx.power[n];
    v = std::max(v, (p.r[n].trace().real() - pw) / pw);
    v = std::max(v, -linalg::min_eigenvalue(p.r[n]) / pw);
    v = std::max(v, -linalg::min_eigenvalue(p.q[n]) / s2);
    if (has_cap(ctx.cap[n]) && n < static_cast<int>(p.rates.size())) {
      v = std::max(v, (p.rates[n] - ctx.cap[n]) / std::max(1.0, ctx.cap[n]));
    }
  }
  return std::max(v, 0.0);
}

double bisect_uniform_q(const DesignContext& ctx, const std::vector<CMat>& r, int n, double target_bits,
                        bool* failed) {
  if (failed) *failed = false;
  const double s2 = ctx.set->noise_power;
  const int d = ctx.rx_dim();
  const CMat eye = CMat::Identity(d, d);
  auto rate_at = [&](double log_q) { return rate_D(*ctx.set, r, std::exp(log_q) * s2 * eye, n, ctx.combiner(n)); };
  double lo = std::log(1e-12);
  if (rate_at(lo) <= target_bits) return std::exp(lo) * s2;
  double hi = 0.0;
  while (rate_at(hi) > target_bits) {
    hi += std::log(10.0);
    if (hi > std::log(1e30)) {
      if (failed) *failed = true;
      return std::numeric_limits<double>::infinity();
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rate_at(mid) > target_bits) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(hi) * s2;  // the upper end always satisfies the target
}

DesignPoint init_feasible(const DesignContext& ctx, double rate_fraction, std::vector<std::string>* flags) {
  const int nb = ctx.num_bs();
  const int mt = ctx.set->mt;
  const int d = ctx.rx_dim();
  DesignPoint p;
  p.r.resize(nb);
  p.q.resize(nb);
  for (int n = 0; n < nb; ++n) p.r[n] = (ctx.power[n] / mt) * CMat::Identity(mt, mt);
  for (int n = 0; n < nb; ++n) {
    if (!has_cap(ctx.cap[n])) {
      p.q[n] = CMat::Zero(d, d);
      continue;
    }
    bool failed = false;
    const double q = bisect_uniform_q(ctx, p.r, n, rate_fraction * ctx.cap[n], &failed);
    if (failed) {
      if (flags) flags->push_back("init: no finite Q meets the rate target at BS " + std::to_string(n));
      p.q[n] = 1e30 * ctx.set->noise_power * CMat::Identity(d, d);
    } else {
      p.q[n] = q * CMat::Identity(d, d);
    }
  }
  evaluate(ctx, p);
  return p;
}

bool restore_rates_by_power(const DesignContext& ctx, DesignPoint& p) {
  if (p.rates.size() != p.r.size()) evaluate(ctx, p);
  if (rates_fit(ctx, p.rates)) return false;
  auto scaled = [&](double a) {
    std::vector<CMat> r = p.r;
    for (auto& m : r) m *= a;
    return r;
  };
  auto fits = [&](double a) {
    const auto r = scaled(a);
    for (int n = 0; n < ctx.num_bs(); ++n) {
      if (has_cap(ctx.cap[n]) && !(rate_or_inf(ctx, r, p.q[n], n) <= ctx.cap[n])) return false;
    }
    return true;
  };
  double lo = 0.0;
  double hi = 1.0;
  if (!fits(lo)) throw RateUnbounded("restore_rates_by_power: the rate exceeds the cap even with zero power");
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fits(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  p.r = scaled(lo);
  evaluate(ctx, p);
  return true;
}

bool restore_rates_by_noise(const DesignContext& ctx, DesignPoint& p) {
  if (p.rates.size() != p.r.size()) evaluate(ctx, p);
  bool changed = false;
  const double s2 = ctx.set->noise_power;
  const int d = ctx.rx_dim();
  const CMat eye = CMat::Identity(d, d);
  for (int n = 0; n < ctx.num_bs(); ++n) {
    if (!has_cap(ctx.cap[n]) || p.rates[n] <= ctx.cap[n] + rate_tol(ctx.cap[n])) continue;
    auto fits = [&](double kappa) { return rate_or_inf(ctx, p.r, p.q[n] + kappa * s2 * eye, n) <= ctx.cap[n]; };
    double hi = 1e-6;
    while (!fits(hi)) {
      hi *= 4.0;
      if (hi > 1e30) throw RateUnbounded("restore_rates_by_noise: no finite Q meets the cap");
    }
    double lo = 0.0;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (fits(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    p.q[n] = linalg::hermitize(p.q[n] + hi * s2 * eye);
    changed = true;
  }
  if (changed) evaluate(ctx, p);
  return changed;
}

DesignPoint sca_transmit(const DesignContext& ctx, const DesignPoint& start, const OptimizerOptions& opt,
                         OptimizerReport* report) {
  const SampleSet& set = *ctx.set;
  const int nb = ctx.num_bs();
  const int mt = set.mt;
  const int k = set.num_targets;
  const linalg::HermitianBasis basis(mt);
  const int per = basis.size();

  DesignPoint cur = start;
  evaluate(ctx, cur);
  if (restore_rates_by_power(ctx, cur)) add_flag(report, "restored: transmit power scaled to meet the rate caps");

  // PFIM in the normalized variables R'_n = R_n / Pbar_n; fixed while Q is.
  AffineFim map = pfim_affine_in_R(set, weighting(ctx, cur.q), ctx.combiners);
  for (int n = 0; n < nb; ++n) {
    for (int a = 0; a < per; ++a) map.coeffs[static_cast<std::size_t>(n) * per + a] *= ctx.power[n];
  }

  int steps = 0;
  for (int it = 0; it < opt.max_inner; ++it) {
    convex::SdpProblem prob;
    std::vector<int> blocks(nb);
    std::vector<int> params;
    for (int n = 0; n < nb; ++n) {
      blocks[n] = prob.add_hermitian("R" + std::to_string(n), mt);
      prob.add_psd(blocks[n]);
      prob.add_trace_le(blocks[n], 1.0);
      for (int a = 0; a < per; ++a) params.push_back(prob.block(blocks[n]).offset + a);
    }
    std::vector<int> tau(2 * k);
    for (int i = 0; i < 2 * k; ++i) tau[i] = prob.block(prob.add_scalar("tau" + std::to_string(i))).offset;

    Vec ref(static_cast<Eigen::Index>(nb) * per);
    for (int n = 0; n < nb; ++n) ref.segment(static_cast<Eigen::Index>(n) * per, per) = basis.to_params(cur.r[n] / ctx.power[n]);
    const Vec w = position_scale(map.evaluate(ref), k);
    prob.add_schur_group(convex::schur_pcrb_lmis(map, params, tau, k, {ref, w}));
    std::vector<convex::LinearTerm> obj;
    for (int i = 0; i < 2 * k; ++i) obj.push_back({tau[i], w(i) / w.sum()});
    prob.set_objective(obj);

    for (int n = 0; n < nb; ++n) {
      if (!has_cap(ctx.cap[n])) continue;
      const RateLinearR lin = surrogate_Dhat_linear(set, cur.r, cur.q[n], n, ctx.combiner(n));
      convex::LinearConstraint c;
      c.name = "rate" + std::to_string(n);
      for (int u = 0; u < nb; ++u) {
        auto terms = prob.trace_terms(blocks[u], lin.w[u] * (ctx.power[u] / linalg::ln2()));
        c.terms.insert(c.terms.end(), terms.begin(), terms.end());
      }
      c.constant = lin.constant - ctx.cap[n];
      prob.add_linear(std::move(c));
    }

    convex::SolverOptions so = opt.solver;
    Vec x0 = Vec::Zero(prob.num_vars());
    for (int n = 0; n < nb; ++n) {
      const CMat shrunk = 0.98 * cur.r[n] / ctx.power[n] + (0.01 / mt) * CMat::Identity(mt, mt);
      prob.set_hermitian(blocks[n], shrunk, x0);
    }
    for (int i = 0; i < 2 * k; ++i) x0(tau[i]) = 2.0;
    so.start = x0;
    const convex::SolverReport sr = convex::solve(prob, so);
    if (report) {
      report->newton_steps += sr.newton_steps;
      report->phase1_steps += sr.phase1_steps;
      ++report->sdp_solves;
    }
    if (sr.status == convex::SolverStatus::infeasible || sr.x.size() != prob.num_vars() || !sr.x.allFinite()) {
      add_flag(report, std::string("transmit SDP: ") + convex::to_string(sr.status) + " " + sr.message);
      break;
    }
    if (!sr.ok()) add_flag(report, std::string("transmit SDP: ") + convex::to_string(sr.status) + " " + sr.message);

    DesignPoint cand = cur;
    for (int n = 0; n < nb; ++n) {
      cand.r[n] = ctx.power[n] * linalg::project_psd(prob.hermitian_value(blocks[n], sr.x));
      const double tr = cand.r[n].trace().real();
      if (tr > ctx.power[n]) cand.r[n] *= ctx.power[n] / tr;
    }
    evaluate(ctx, cand);
    if (restore_rates_by_power(ctx, cand)) add_flag(report, "restored: transmit power scaled to meet the rate caps");
    if (!accept_candidate(cur, cand, report)) break;
    const double rel = (cur.objective - cand.objective) / cur.objective;
    cur = std::move(cand);
    ++steps;
    push_trace(report, 'R', ctx, cur, convex::to_string(sr.status));
    if (rel < opt.eps_sca) break;
  }
  if (report) report->inner_iterations.push_back(steps);
  return cur;
}

DesignPoint sca_compress(const DesignContext& ctx, const DesignPoint& start, const OptimizerOptions& opt,
                         OptimizerReport* report) {
  const SampleSet& set = *ctx.set;
  const int nb = ctx.num_bs();
  const int k = set.num_targets;
  const int d = ctx.rx_dim();
  const double s2 = set.noise_power;
  const linalg::HermitianBasis basis(d);
  const int per = basis.size();

  DesignPoint cur = start;
  evaluate(ctx, cur);
  if (restore_rates_by_noise(ctx, cur)) add_flag(report, "restored: compression noise raised to meet the rate caps");

  std::vector<int> free_bs;
  for (int n = 0; n < nb; ++n) {
    if (has_cap(ctx.cap[n])) free_bs.push_back(n);
  }
  if (free_bs.empty()) {
    if (report) report->inner_iterations.push_back(0);
    return cur;
  }

  // PFIM in T'_n = sigma^2 T_n for the capped BSs; the rest stay at their
  // current weighting and move into the constant.
  const AffineFim full = pfim_affine_in_T(set, cur.r, ctx.combiners);
  const std::vector<CMat> t_now = weighting(ctx, cur.q);
  AffineFim map;
  map.constant = full.constant;
  for (int n = 0; n < nb; ++n) {
    const bool is_free = has_cap(ctx.cap[n]);
    const Vec tn = basis.to_params(t_now[n]);
    for (int a = 0; a < per; ++a) {
      const Mat& c = full.coeffs[static_cast<std::size_t>(n) * per + a];
      if (is_free) {
        map.coeffs.push_back(c / s2);
      } else {
        map.constant += tn(a) * c;
      }
    }
  }

  std::vector<CMat> shape(nb);
  for (int n = 0; n < nb; ++n) {
    const CMat n0 = noise_shape(ctx, n);
    shape[n] = Eigen::LLT<CMat>(n0).matrixL();
  }

  int steps = 0;
  for (int it = 0; it < opt.max_inner; ++it) {
    convex::SdpProblem prob;
    std::vector<int> blocks(nb, -1);
    std::vector<int> params;
    for (int n : free_bs) {
      blocks[n] = prob.add_hermitian("T" + std::to_string(n), d);
      prob.add_psd(blocks[n]);
      for (int a = 0; a < per; ++a) params.push_back(prob.block(blocks[n]).offset + a);
    }
    std::vector<int> tau(2 * k);
    for (int i = 0; i < 2 * k; ++i) tau[i] = prob.block(prob.add_scalar("tau" + std::to_string(i))).offset;

    const std::vector<CMat> t_cur = weighting(ctx, cur.q);
    Vec ref(static_cast<Eigen::Index>(free_bs.size()) * per);
    for (std::size_t j = 0; j < free_bs.size(); ++j) {
      ref.segment(static_cast<Eigen::Index>(j) * per, per) = basis.to_params(s2 * t_cur[free_bs[j]]);
    }
    const Vec w = position_scale(map.evaluate(ref), k);
    prob.add_schur_group(convex::schur_pcrb_lmis(map, params, tau, k, {ref, w}));
    std::vector<convex::LinearTerm> obj;
    for (int i = 0; i < 2 * k; ++i) obj.push_back({tau[i], w(i) / w.sum()});
    prob.set_objective(obj);

    for (int n : free_bs) {
      // I - L^H T' L > 0 is the domain of the log-det term.
      convex::LmiConstraint arg;
      arg.name = "bound" + std::to_string(n);
      arg.dim = d;
      arg.constant = CMat::Identity(d, d);
      const CMat& l = shape[n];
      for (int a = 0; a < per; ++a) {
        const CMat e = -(l.adjoint() * basis.element(a) * l);
        std::vector<convex::Entry> entries;
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            if (std::abs(e(i, j)) > 0.0) entries.push_back({i, j, e(i, j)});
          }
        }
        arg.vars.push_back(prob.block(blocks[n]).offset + a);
        arg.coefs.push_back(std::move(entries));
      }
      const RateLinearT lin = surrogate_Dtilde_linear(set, cur.r, t_cur[n], n, ctx.combiner(n));
      convex::LogDetConstraint c;
      c.name = "rate" + std::to_string(n);
      c.terms = prob.trace_terms(blocks[n], lin.w / linalg::ln2());
      c.constant = lin.constant - ctx.cap[n];
      c.weight = 1.0 / linalg::ln2();
      c.arg = std::move(arg);
      prob.add_logdet(std::move(c));
    }

    convex::SolverOptions so = opt.solver;
    Vec x0 = Vec::Zero(prob.num_vars());
    for (int n : free_bs) prob.set_hermitian(blocks[n], s2 * t_cur[n], x0);
    for (int i = 0; i < 2 * k; ++i) x0(tau[i]) = 2.0;
    so.start = x0;
    const convex::SolverReport sr = convex::solve(prob, so);
    if (report) {
      report->newton_steps += sr.newton_steps;
      report->phase1_steps += sr.phase1_steps;
      ++report->sdp_solves;
    }
    if (sr.status == convex::SolverStatus::infeasible || sr.x.size() != prob.num_vars() || !sr.x.allFinite()) {
      add_flag(report, std::string("compression SDP: ") + convex::to_string(sr.status) + " " + sr.message);
      break;
    }
    if (!sr.ok()) add_flag(report, std::string("compression SDP: ") + convex::to_string(sr.status) + " " + sr.message);

    DesignPoint cand = cur;
    for (int n : free_bs) {
      bool clamped = false;
      cand.q[n] = q_from_normalized_t(ctx, n, prob.hermitian_value(blocks[n], sr.x), &clamped);
      if (clamped) {
        cand.q_clamped = true;
        add_flag(report, "compression noise clamped near the boundary");
      }
    }
    evaluate(ctx, cand);
    if (restore_rates_by_noise(ctx, cand)) add_flag(report, "restored: compression noise raised to meet the rate caps");
    if (!accept_candidate(cur, cand, report)) break;
    const double rel = (cur.objective - cand.objective) / cur.objective;
    cur = std::move(cand);
    ++steps;
    push_trace(report, 'Q', ctx, cur, convex::to_string(sr.status));
    if (rel < opt.eps_sca) break;
  }
  if (report) report->inner_iterations.push_back(steps);
  return cur;
}

OptimizerReport alternate_from(const DesignContext& ctx, const DesignPoint& start, const OptimizerOptions& opt) {
  OptimizerReport report;
  DesignPoint cur = start;
  evaluate(ctx, cur);
  push_trace(&report, 'I', ctx, cur, "start");
  report.outer_objective.push_back(cur.objective);
  const bool capped = any_cap(ctx);
  report.termination = "max_outer";
  for (int it = 1; it <= opt.max_outer; ++it) {
    const double prev = cur.objective;
    const auto t0 = std::chrono::steady_clock::now();
    cur = sca_transmit(ctx, cur, opt, &report);
    if (capped) cur = sca_compress(ctx, cur, opt, &report);
    report.outer_wall_ms.push_back(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    report.outer_objective.push_back(cur.objective);
    report.outer_iterations = it;
    if ((prev - cur.objective) / prev < opt.eps_ao) {
      report.termination = "converged";
      break;
    }
  }
  report.final = cur;
  return report;
}

OptimizerReport alternate(const DesignContext& ctx, const OptimizerOptions& opt) {
  std::vector<std::string> flags;
  const DesignPoint start = init_feasible(ctx, opt.init_rate_fraction, &flags);
  OptimizerReport report = alternate_from(ctx, start, opt);
  report.flags.insert(report.flags.begin(), flags.begin(), flags.end());
  return report;
}

DesignPoint solve_transmit_unconstrained(const DesignContext& ctx, const std::vector<CMat>& q,
                                         const OptimizerOptions& opt, OptimizerReport* report) {
  DesignContext free = ctx;
  std::fill(free.cap.begin(), free.cap.end(), std::numeric_limits<double>::infinity());
  DesignPoint start;
  const int mt = ctx.set->mt;
  for (int n = 0; n < ctx.num_bs(); ++n) start.r.push_back((ctx.power[n] / mt) * CMat::Identity(mt, mt));
  start.q = q;
  OptimizerOptions one = opt;
  one.max_inner = 1;  // no linearization involved, one SDP is exact
  DesignPoint out = sca_transmit(free, start, one, report);
  out.rates = evaluate_rates(ctx, out.r, out.q);
  return out;
}

void write_report_csv(const std::string& path, const OptimizerReport& report) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << "iter,phase,objective,max_constraint_violation,solver_status\n";
  f.precision(17);
  for (const auto& e : report.trace) {
    f << e.iter << ',' << e.phase << ',' << e.objective << ',' << e.max_violation << ',' << e.solver_status << '\n';
  }
}

}  // namespace netsense
