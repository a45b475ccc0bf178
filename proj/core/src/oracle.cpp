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

#include "netsense/oracle.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "netsense/fronthaul.hpp"
#include "netsense/linalg.hpp"

namespace netsense::oracle {

namespace {

// Mean received at BS m for the given angles and attenuations.
CVec mean_signal(const Sample& s, const Mat& theta, const Attenuation& b, int m, int mr, int mt,
                 const std::vector<CVec>& x) {
  const int n_bs = s.num_bs();
  const int k_t = s.num_targets();
  std::vector<double> th_m(k_t);
  for (int k = 0; k < k_t; ++k) th_m[k] = theta(m, k);
  const CMat a = steering_matrix(th_m, mr);
  CVec mu = CVec::Zero(mr);
  for (int v = 0; v < n_bs; ++v) {
    if (x[v].size() == 0) continue;
    std::vector<double> th_v(k_t);
    for (int k = 0; k < k_t; ++k) th_v[k] = theta(v, k);
    const CMat vv = steering_matrix(th_v, mt);
    mu += a * (b.row(m, v).asDiagonal() * (vv.transpose() * x[v]));
  }
  return mu;
}

}  // namespace

Mat fim_finite_difference(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& o,
                          const FdConfig& cfg) {
  const int n_bs = s.num_bs();
  const int k_t = s.num_targets();
  const FimLayout lay(n_bs, k_t);
  const int mr = static_cast<int>(s.a[0].rows());
  const int mt = static_cast<int>(s.v[0].rows());
  const int dim = lay.zeta_dim();

  double bmax = 0.0;
  for (int n = 0; n < n_bs; ++n) {
    for (int u = 0; u < n_bs; ++u) {
      for (int k = 0; k < k_t; ++k) bmax = std::max(bmax, std::abs(s.b(n, u, k)));
    }
  }
  const double hb = cfg.b_step * (bmax > 0.0 ? bmax : 1.0);

  std::vector<CMat> oinv;
  for (const auto& om : o) oinv.push_back(linalg::inverse_hpd(om));

  Mat f = Mat::Zero(dim, dim);
  for (int u = 0; u < n_bs; ++u) {
    const CMat root = linalg::sqrtm_psd(r[u]);
    for (int j = 0; j < mt; ++j) {
      std::vector<CVec> x(n_bs);
      x[u] = root.col(j);
      for (int m = 0; m < n_bs; ++m) {
        CMat d(mr, dim);
        for (int p = 0; p < dim; ++p) {
          Mat th_p = s.theta;
          Mat th_m = s.theta;
          Attenuation b_p = s.b;
          Attenuation b_m = s.b;
          double h = 0.0;
          if (p < lay.nk()) {
            const int n = p / k_t;
            const int k = p % k_t;
            th_p(n, k) += cfg.angle_step;
            th_m(n, k) -= cfg.angle_step;
            h = cfg.angle_step;
          } else {
            const bool imag = p >= lay.nk() + lay.nnk();
            const int idx = p - lay.nk() - (imag ? lay.nnk() : 0);
            const int k = idx % k_t;
            const int nu = idx / k_t;
            const int n = nu / n_bs;
            const int uu = nu % n_bs;
            const cd step = imag ? cd(0.0, hb) : cd(hb, 0.0);
            b_p(n, uu, k) += step;
            b_m(n, uu, k) -= step;
            h = hb;
          }
          d.col(p) = (mean_signal(s, th_p, b_p, m, mr, mt, x) - mean_signal(s, th_m, b_m, m, mr, mt, x)) / (2.0 * h);
        }
        f += 2.0 * (d.adjoint() * oinv[m] * d).real();
      }
    }
  }
  return linalg::symmetrize(f);
}

ElementwiseBlocks fim_elementwise(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& o) {
  const int n_bs = s.num_bs();
  const int k_t = s.num_targets();
  const FimLayout lay(n_bs, k_t);
  const int mr = static_cast<int>(s.a[0].rows());
  const int mt = static_cast<int>(s.v[0].rows());
  std::vector<CMat> oinv;
  for (const auto& om : o) oinv.push_back(linalg::inverse_hpd(om));

  // dG_{m,v} / d(theta_{i,k}) and dG_{m,v} / d(b^R_{n,u,k}) as explicit Mr x Mt matrices.
  auto d_theta = [&](int m, int v, int i, int k) {
    CMat g = CMat::Zero(mr, mt);
    const cd b = s.b(m, v, k);
    if (m == i) g += b * s.da[m].col(k) * s.v[v].col(k).transpose();
    if (v == i) g += b * s.a[m].col(k) * s.dv[v].col(k).transpose();
    return g;
  };
  auto d_b = [&](int m, int v, int n, int u, int k) {
    if (m != n || v != u) return CMat(CMat::Zero(mr, mt));
    return CMat(s.a[m].col(k) * s.v[v].col(k).transpose());
  };
  auto element = [&](auto&& li, auto&& lj) {
    cd acc = 0.0;
    for (int m = 0; m < n_bs; ++m) {
      for (int v = 0; v < n_bs; ++v) {
        const CMat gi = li(m, v);
        const CMat gj = lj(m, v);
        acc += (gi.adjoint() * oinv[m] * gj * r[v]).trace();
      }
    }
    return acc;
  };

  ElementwiseBlocks out;
  out.f1 = CMat::Zero(lay.nk(), lay.nk());
  out.f2 = CMat::Zero(lay.nk(), lay.nnk());
  out.f3 = CMat::Zero(lay.nnk(), lay.nnk());
  for (int i = 0; i < n_bs; ++i) {
    for (int k = 0; k < k_t; ++k) {
      auto li = [&](int m, int v) { return d_theta(m, v, i, k); };
      for (int n = 0; n < n_bs; ++n) {
        for (int l = 0; l < k_t; ++l) {
          out.f1(lay.theta_index(i, k), lay.theta_index(n, l)) =
              element(li, [&](int m, int v) { return d_theta(m, v, n, l); });
        }
      }
      for (int n = 0; n < n_bs; ++n) {
        for (int u = 0; u < n_bs; ++u) {
          for (int l = 0; l < k_t; ++l) {
            out.f2(lay.theta_index(i, k), lay.b_index(n, u, l)) =
                element(li, [&](int m, int v) { return d_b(m, v, n, u, l); });
          }
        }
      }
    }
  }
  for (int n = 0; n < n_bs; ++n) {
    for (int u = 0; u < n_bs; ++u) {
      for (int k = 0; k < k_t; ++k) {
        auto li = [&](int m, int v) { return d_b(m, v, n, u, k); };
        for (int n2 = 0; n2 < n_bs; ++n2) {
          for (int u2 = 0; u2 < n_bs; ++u2) {
            for (int l = 0; l < k_t; ++l) {
              out.f3(lay.b_index(n, u, k), lay.b_index(n2, u2, l)) =
                  element(li, [&](int m, int v) { return d_b(m, v, n2, u2, l); });
            }
          }
        }
      }
    }
  }
  return out;
}

double hadamard_identity_gap(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  auto rc = [&](int r, int c) {
    CMat a(r, c);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) a(i, j) = cd(nd(rng), nd(rng));
    }
    return a;
  };
  const CMat a = rc(m, m);
  const CMat b = rc(m, m);
  const CVec x = rc(m, 1);
  const CVec y = rc(m, 1);
  const cd direct = x.dot(a.cwiseProduct(b) * y);  // x^H (A o B) y
  const cd rearranged = (x.conjugate().asDiagonal() * a * y.asDiagonal() * b.transpose()).trace();
  return std::abs(direct - rearranged) / std::max(std::abs(direct), 1e-300);
}

double scaled_relative_error(const Mat& a, const Mat& b) {
  Vec d(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) d(i) = a(i, i) > 0.0 ? 1.0 / std::sqrt(a(i, i)) : 1.0;
  const Mat as = d.asDiagonal() * a * d.asDiagonal();
  const Mat bs = d.asDiagonal() * b * d.asDiagonal();
  const double den = std::max(as.norm(), bs.norm());
  return den > 0.0 ? (as - bs).norm() / den : 0.0;
}

Mat prior_fim_monte_carlo(const std::vector<GaussianPrior>& priors, int num_bs, int samples, std::mt19937_64& rng) {
  const FimLayout lay(num_bs, static_cast<int>(priors.size()));
  Mat f = Mat::Zero(lay.xi_dim(), lay.xi_dim());
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec score(lay.position_dim());
  for (int s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < priors.size(); ++k) {
      const double r = priors[k].radius;
      // q - center = r z, score = -(q - center) / r^2 = -z / r
      score(2 * k) = -nd(rng) / r;
      score(2 * k + 1) = -nd(rng) / r;
    }
    f.topLeftCorner(lay.position_dim(), lay.position_dim()) += score * score.transpose();
  }
  return f / static_cast<double>(samples);
}

MiniResult grid_minimize(const std::function<double(const Vec&)>& f, const Vec& lo_in, const Vec& hi_in, int points,
                         int refinements) {
  const int dim = static_cast<int>(lo_in.size());
  Vec lo = lo_in;
  Vec hi = hi_in;
  MiniResult best;
  best.objective = std::numeric_limits<double>::infinity();
  best.argmin = 0.5 * (lo + hi);
  for (int level = 0; level <= refinements; ++level) {
    long total = 1;
    for (int d = 0; d < dim; ++d) total *= points;
    for (long idx = 0; idx < total; ++idx) {
      Vec p(dim);
      long rem = idx;
      for (int d = 0; d < dim; ++d) {
        const int i = static_cast<int>(rem % points);
        rem /= points;
        p(d) = points > 1 ? lo(d) + (hi(d) - lo(d)) * i / (points - 1) : 0.5 * (lo(d) + hi(d));
      }
      const double v = f(p);
      ++best.evaluations;
      if (std::isfinite(v) && v < best.objective) {
        best.objective = v;
        best.argmin = p;
      }
    }
    // Shrink the box to two grid cells around the incumbent, clipped to the original box.
    for (int d = 0; d < dim; ++d) {
      const double cell = points > 1 ? (hi(d) - lo(d)) / (points - 1) : 0.0;
      lo(d) = std::max(lo_in(d), best.argmin(d) - 2.0 * cell);
      hi(d) = std::min(hi_in(d), best.argmin(d) + 2.0 * cell);
    }
  }
  return best;
}

MiniResult grid_search_transmit(const MiniTransmitProblem& p, int points, int refinements) {
  const SampleSet& set = *p.set;
  if (set.num_bs != 1 || set.mt != 2) throw ShapeError("grid_search_transmit: needs N = 1 and Mt = 2");
  const bool capped = p.rate_cap > 0.0 && std::isfinite(p.rate_cap);
  const auto oinv = noise_inverse({p.q}, set.noise_power);
  auto build = [&](const Vec& v) {
    const double a = v(0);
    const double rho = v(1);
    const double psi = v(2);
    const double tau = capped ? v(3) : 1.0;
    const double off = rho * std::sqrt(std::max(0.0, a * (1.0 - a)));
    CMat r(2, 2);
    r(0, 0) = a;
    r(1, 1) = 1.0 - a;
    r(0, 1) = std::polar(off, psi);
    r(1, 0) = std::conj(r(0, 1));
    return CMat(p.power * tau * r);
  };
  auto objective = [&](const Vec& v) {
    const CMat r = build(v);
    if (capped && rate_D(set, {r}, p.q, 0) > p.rate_cap) return std::numeric_limits<double>::infinity();
    try {
      return pcrb(pfim_from_oinv(set, {r}, oinv), set.num_targets);
    } catch (const SingularFim&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  const int dim = capped ? 4 : 3;
  Vec lo = Vec::Zero(dim);
  Vec hi(dim);
  hi(0) = 1.0;
  hi(1) = 1.0;
  hi(2) = 2.0 * std::numbers::pi;
  if (capped) hi(3) = 1.0;
  MiniResult res = grid_minimize(objective, lo, hi, points, refinements);
  return res;
}

MiniResult grid_search_compress(const MiniCompressProblem& p, int points, int refinements) {
  const SampleSet& set = *p.set;
  if (set.mr != 1) throw ShapeError("grid_search_compress: needs Mr = 1");
  if (set.num_bs > 2) throw ShapeError("grid_search_compress: at most two BSs");
  const double s2 = set.noise_power;
  auto objective = [&](const Vec& v) {
    std::vector<CMat> q(set.num_bs);
    for (int n = 0; n < set.num_bs; ++n) {
      q[n] = CMat::Constant(1, 1, cd(s2 * std::pow(10.0, v(n)), 0.0));
      if (rate_D(set, p.r, q[n], n) > p.rate_cap[n]) return std::numeric_limits<double>::infinity();
    }
    return pcrb(pfim(set, p.r, q), set.num_targets);
  };
  const Vec lo = Vec::Constant(set.num_bs, -8.0);
  const Vec hi = Vec::Constant(set.num_bs, std::log10(p.q_max));
  return grid_minimize(objective, lo, hi, set.num_bs == 1 ? points : std::max(21, points / 4), refinements);
}

}  // namespace netsense::oracle
