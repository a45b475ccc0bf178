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

#include "netsense/verify.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "netsense/convex.hpp"
#include "netsense/ebc.hpp"
#include "netsense/fim.hpp"
#include "netsense/fronthaul.hpp"
#include "netsense/linalg.hpp"
#include "netsense/optimizer.hpp"
#include "netsense/oracle.hpp"

namespace netsense::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

CMat random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = cd(nd(rng), nd(rng));
  }
  return m;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

void finish(SuiteResult& r, Clock::time_point t0) {
  r.passed = r.cases > 0 && std::isfinite(r.metric) && r.metric <= r.tolerance;
  r.seconds = seconds_since(t0);
}

/// Worst pairwise disagreement of the three FIM constructions.
double fim_triple_error(std::mt19937_64& rng) {
  const Scenario sc = random_small_scenario(rng);
  const SampleSet set = draw_samples(sc, rng);
  const Sample& s = set.samples[0];
  std::vector<CMat> r, o, oinv;
  for (int n = 0; n < sc.num_bs(); ++n) {
    r.push_back(random_hpd(sc.mt, rng));
    o.push_back(random_hpd(sc.mr, rng, 1.0));
    oinv.push_back(linalg::inverse_hpd(o.back()));
  }
  const Mat blocks = assemble_F0_zeta(block_F1(s, r, oinv), block_F2(s, r, oinv), block_F3(s, r, oinv));
  const Mat fd = oracle::fim_finite_difference(s, r, o);
  const auto el = oracle::fim_elementwise(s, r, o);
  const Mat elem = assemble_F0_zeta(el.f1, el.f2, el.f3);
  return std::max({oracle::scaled_relative_error(blocks, fd), oracle::scaled_relative_error(blocks, elem),
                   oracle::scaled_relative_error(elem, fd)});
}

/// Disagreement of the block assembly with the element-wise oracle only.
double fim_block_error(std::mt19937_64& rng) {
  const Scenario sc = random_small_scenario(rng);
  const SampleSet set = draw_samples(sc, rng);
  const Sample& s = set.samples[0];
  std::vector<CMat> r, o, oinv;
  for (int n = 0; n < sc.num_bs(); ++n) {
    r.push_back(random_hpd(sc.mt, rng));
    o.push_back(random_hpd(sc.mr, rng, 1.0));
    oinv.push_back(linalg::inverse_hpd(o.back()));
  }
  const Mat blocks = assemble_F0_zeta(block_F1(s, r, oinv), block_F2(s, r, oinv), block_F3(s, r, oinv));
  const auto el = oracle::fim_elementwise(s, r, o);
  return oracle::scaled_relative_error(blocks, assemble_F0_zeta(el.f1, el.f2, el.f3));
}

bool nonincreasing(const std::vector<double>& v, double slack, double* worst) {
  bool ok = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double rise = (v[i] - v[i - 1]) / std::abs(v[i - 1]);
    *worst = std::max(*worst, rise);
    if (rise > slack) ok = false;
  }
  return ok;
}

std::vector<double> trace_objectives(const OptimizerReport& rep, char phase) {
  std::vector<double> out;
  for (const auto& e : rep.trace) {
    if (phase == 0 || e.phase == phase || e.phase == 'I') out.push_back(e.objective);
  }
  return out;
}

}  // namespace

CMat random_hpd(int dim, std::mt19937_64& rng, double floor) {
  const CMat x = random_complex(dim, dim, rng);
  return linalg::hermitize(x * x.adjoint() / dim + floor * CMat::Identity(dim, dim));
}

Scenario random_small_scenario(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Scenario sc;
  sc.bs_positions = {Vec2(0.8, 0.0), Vec2(-0.8, 0.0)};
  for (int k = 0; k < 2; ++k) {
    GaussianPrior g;
    g.center = Vec2(uniform(rng, -0.6, 0.6), uniform(rng, 0.4, 1.2));
    g.radius = uniform(rng, 0.02, 0.06);
    sc.targets.push_back(g);
  }
  sc.mt = 3;
  sc.mr = 3;
  sc.noise_power = 1.0;
  sc.power_budget = {1.0, 1.0};
  sc.fronthaul_cap = {4.0, 4.0};
  sc.mc_samples = 1;
  Attenuation b(2, 2);
  for (int n = 0; n < 2; ++n) {
    for (int u = 0; u < 2; ++u) {
      for (int k = 0; k < 2; ++k) b(n, u, k) = cd(nd(rng), nd(rng));
    }
  }
  sc.attenuation = b;
  return sc;
}

Scenario random_design_scenario(std::mt19937_64& rng, int mt, int mr, int samples) {
  Scenario sc = default_scenario();
  for (auto& t : sc.targets) {
    t.center = Vec2(uniform(rng, -0.6, 0.6), uniform(rng, 0.4, 1.0));
    t.radius = uniform(rng, 0.02, 0.05);
  }
  sc.mt = mt;
  sc.mr = mr;
  sc.mc_samples = samples;
  sc.rcs_m2 = std::pow(10.0, uniform(rng, 4.0, 7.0));
  const double p = dbm_to_watt(uniform(rng, 25.0, 37.0));
  sc.power_budget = {p, p * uniform(rng, 0.5, 1.0)};
  sc.fronthaul_cap = {uniform(rng, 2.0, 16.0), uniform(rng, 2.0, 16.0)};
  sc.rng_seed = rng();
  refresh_attenuation(sc);
  return sc;
}

SuiteResult fim_agreement(int instances, double tol, std::uint64_t seed) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "fim_oracle_agreement";
  r.tolerance = tol;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < instances; ++i) {
    r.metric = std::max(r.metric, fim_triple_error(rng));
    ++r.cases;
  }
  r.detail = "worst pairwise scaled Frobenius error";
  finish(r, t0);
  return r;
}

SuiteResult mutation_smoke(int instances, double tol, std::uint64_t seed) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "fim_mutation_detected";
  std::mt19937_64 rng(seed);
  double smallest = std::numeric_limits<double>::infinity();
  testing_hooks::set_fim_mutation(true);
  try {
    for (int i = 0; i < instances; ++i) {
      smallest = std::min(smallest, fim_block_error(rng));
      ++r.cases;
    }
  } catch (...) {
    testing_hooks::set_fim_mutation(false);
    throw;
  }
  testing_hooks::set_fim_mutation(false);
  // The suite's error measure is how far below the threshold the mutated
  // build stays; passing means every instance exceeded tol.
  r.metric = smallest > tol ? 0.0 : 1.0;
  r.tolerance = 0.0;
  std::ostringstream os;
  os << "smallest mutated error " << smallest << " vs threshold " << tol;
  r.detail = os.str();
  finish(r, t0);
  return r;
}

SuiteResult surrogate_contracts(int perturbations, double tangency_tol, std::uint64_t seed) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "surrogate_contracts";
  r.tolerance = tangency_tol;
  std::mt19937_64 rng(seed);
  Scenario sc = default_scenario();
  sc.rcs_m2 = 1e6;
  sc.mc_samples = 5;
  refresh_attenuation(sc);
  const SampleSet set = draw_samples(sc);
  const DesignContext ctx = make_context(sc, set);
  const int nb = sc.num_bs();
  const double sigma2 = sc.noise_power;

  auto random_r = [&]() {
    std::vector<CMat> out;
    for (int n = 0; n < nb; ++n) {
      CMat x = random_hpd(sc.mt, rng, 0.01);
      out.push_back(x * (ctx.power[n] * uniform(rng, 0.1, 1.0) / x.trace().real()));
    }
    return out;
  };
  auto random_q = [&]() -> CMat { return random_hpd(sc.mr, rng, 0.05) * (sigma2 * uniform(rng, 0.1, 10.0)); };

  double tangency = 0.0;
  double majorize = 0.0;  // largest amount by which a surrogate undercuts the rate
  int violations = 0;
  for (int i = 0; i < perturbations; ++i) {
    const int n = i % nb;
    // R-side surrogate.
    const auto r_tilde = random_r();
    const CMat q = random_q();
    tangency = std::max(tangency, std::abs(surrogate_Dhat(set, r_tilde, r_tilde, q, n) - rate_D(set, r_tilde, q, n)));
    const auto far = random_r();
    const double a = uniform(rng, 0.0, 1.0);
    std::vector<CMat> r_new(nb);
    for (int u = 0; u < nb; ++u) r_new[u] = (1.0 - a) * r_tilde[u] + a * far[u];
    const double gap_r = surrogate_Dhat(set, r_new, r_tilde, q, n) - rate_D(set, r_new, q, n);
    // T-side surrogate.
    const CMat t_bar = t_from_q(random_q(), sigma2);
    const CMat t_far = t_from_q(random_q(), sigma2);
    tangency = std::max(tangency, std::abs(surrogate_Dtilde(set, r_tilde, t_bar, t_bar, n) -
                                           rate_D_T(set, r_tilde, t_bar, n)));
    const double b = uniform(rng, 0.0, 1.0);
    const CMat t_new = linalg::hermitize((1.0 - b) * t_bar + b * t_far);
    const double gap_t = surrogate_Dtilde(set, r_tilde, t_bar, t_new, n) - rate_D_T(set, r_tilde, t_new, n);
    for (double g : {gap_r, gap_t}) {
      if (g < -tangency_tol) ++violations;
      majorize = std::max(majorize, -g);
    }
    r.cases += 2;
  }
  r.metric = violations > 0 ? std::max(tangency, majorize) : tangency;
  std::ostringstream os;
  os << "tangency gap " << tangency << " bits, " << violations << " majorization violations (worst undercut "
     << majorize << ")";
  r.detail = os.str();
  finish(r, t0);
  return r;
}

SuiteResult combiner_invariance(int instances, double tol, std::uint64_t seed) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "combiner_invariance";
  r.tolerance = tol;
  std::mt19937_64 rng(seed);
  for (int i = 0; i < instances; ++i) {
    Scenario sc = default_scenario();
    for (auto& t : sc.targets) t.center = Vec2(uniform(rng, -0.6, 0.6), uniform(rng, 0.4, 1.0));
    sc.mr = 6 + 2 * (i % 3);
    sc.mc_samples = 1;
    sc.rcs_m2 = 1e4;
    sc.rng_seed = rng();
    refresh_attenuation(sc);
    const SampleSet set = draw_samples(sc);
    const Sample& s = set.samples[0];
    const int nb = sc.num_bs();
    const int k = sc.num_targets();
    std::vector<CMat> rr;
    for (int n = 0; n < nb; ++n) rr.push_back(random_hpd(sc.mt, rng) * sc.power_budget[n] / sc.mt);
    std::vector<std::vector<double>> theta(nb);
    for (int n = 0; n < nb; ++n) {
      for (int j = 0; j < k; ++j) theta[n].push_back(s.theta(n, j));
    }
    const EbcPlan plan = make_plan(theta, sc.mr);
    const std::vector<CMat> q0(nb, CMat::Zero(sc.mr, sc.mr));
    const std::vector<CMat> qd(nb, CMat::Zero(2 * k, 2 * k));
    const double full = pcrb(pfim(set, rr, q0), k);
    const double reduced = pcrb(fim_ebc(set, rr, plan.combiners, qd), k);
    std::vector<CMat> cl;
    for (const auto& c : plan.combiners) {
      const CMat l = random_complex(2 * k, 2 * k, rng) + 3.0 * CMat::Identity(2 * k, 2 * k);
      cl.push_back(c * l);
    }
    const double mixed = pcrb(fim_ebc(set, rr, cl, qd), k);
    r.metric = std::max({r.metric, std::abs(full - reduced) / full, std::abs(full - mixed) / full});
    ++r.cases;
  }
  r.detail = "relative PCRB difference over C = E_r, C = I and C = E_r L";
  finish(r, t0);
  return r;
}

SuiteResult descent(int scenarios, double slack, std::uint64_t seed) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "descent";
  r.tolerance = slack;
  std::mt19937_64 rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  int bad = 0;
  for (int i = 0; i < scenarios; ++i) {
    const Scenario sc = random_design_scenario(rng);
    const SampleSet set = draw_samples(sc);
    const DesignContext ctx = make_context(sc, set);
    OptimizerOptions opt;
    opt.max_outer = 5;
    const DesignPoint start = init_feasible(ctx, opt.init_rate_fraction);
    OptimizerReport rep_r, rep_q;
    sca_transmit(ctx, start, opt, &rep_r);
    sca_compress(ctx, start, opt, &rep_q);
    const OptimizerReport rep_a = alternate(ctx, opt);
    if (!nonincreasing(trace_objectives(rep_r, 0), slack, &worst)) ++bad;
    if (!nonincreasing(trace_objectives(rep_q, 0), slack, &worst)) ++bad;
    if (!nonincreasing(trace_objectives(rep_a, 0), slack, &worst)) ++bad;
    if (!nonincreasing(rep_a.outer_objective, slack, &worst)) ++bad;
    r.cases += 4;
  }
  r.metric = std::max(0.0, worst);
  std::ostringstream os;
  os << bad << " nonmonotone traces, largest relative rise " << worst;
  r.detail = os.str();
  finish(r, t0);
  return r;
}

SuiteResult schur_lmi(int instances, double tol, std::uint64_t seed) {
  const auto t0 = Clock::now();
  SuiteResult r;
  r.name = "schur_lmi";
  r.tolerance = tol;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  for (int i = 0; i < instances; ++i) {
    const int k = 1 + i % 3;
    const int dim = 2 * k + 2 + i % 4;
    Mat a(dim, dim);
    for (int p = 0; p < dim; ++p) {
      for (int q = 0; q < dim; ++q) a(p, q) = nd(rng);
    }
    // Spread the scales so the Jacobi scaling matters.
    Vec d(dim);
    for (int p = 0; p < dim; ++p) d(p) = std::pow(10.0, uniform(rng, -2.0, 2.0));
    const Mat f = d.asDiagonal() * (a * a.transpose() + 0.1 * Mat::Identity(dim, dim)) * d.asDiagonal();
    AffineFim map;
    map.constant = f;
    convex::SdpProblem prob;
    std::vector<int> t_vars;
    std::vector<convex::LinearTerm> obj;
    for (int j = 0; j < 2 * k; ++j) {
      t_vars.push_back(prob.block(prob.add_scalar("t")).offset);
      obj.push_back({t_vars.back(), 1.0});
    }
    prob.add_schur_group(convex::schur_pcrb_lmis(map, {}, t_vars, k));
    prob.set_objective(obj);
    const auto rep = convex::solve(prob);
    const Mat fi = f.inverse();
    const double exact = fi.diagonal().head(2 * k).sum();
    const double err = rep.ok() ? std::abs(rep.objective - exact) / exact : std::numeric_limits<double>::infinity();
    r.metric = std::max(r.metric, err);
    ++r.cases;
  }
  r.detail = "relative error of the SDP optimum against the direct inverse";
  finish(r, t0);
  return r;
}

std::vector<SuiteResult> run_all(const VerifyOptions& o) {
  std::vector<SuiteResult> out;
  out.push_back(fim_agreement(o.fim_instances, 1e-4, o.seed));
  out.push_back(mutation_smoke(5, 1e-4, o.seed));
  out.push_back(surrogate_contracts(o.surrogate_perturbations, 1e-9, o.seed + 1));
  out.push_back(combiner_invariance(o.invariance_instances, 1e-6, o.seed + 2));
  out.push_back(descent(o.descent_scenarios, 1e-6, o.seed + 3));
  out.push_back(schur_lmi(o.schur_instances, 1e-5, o.seed + 4));
  return out;
}

bool print_report(const std::vector<SuiteResult>& results, std::ostream& os) {
  bool all = true;
  for (const auto& r : results) {
    all = all && r.passed;
    os << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(24) << r.name << " cases=" << r.cases
       << " metric=" << std::setprecision(3) << r.metric << " tol=" << r.tolerance << " time=" << std::fixed
       << std::setprecision(1) << r.seconds << "s" << std::defaultfloat << "  " << r.detail << "\n";
  }
  os << (all ? "all suites passed" : "some suites FAILED") << "\n";
  return all;
}

}  // namespace netsense::verify
