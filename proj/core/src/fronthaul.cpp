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

#include "netsense/fronthaul.hpp"

#include <Eigen/Cholesky>

#include "netsense/linalg.hpp"

namespace netsense {

namespace {

double log2det(const CMat& a, const char* what) {
  const auto ld = linalg::logdet_hpd(linalg::hermitize(a));
  if (!ld) throw RateUnbounded(what);
  return *ld / linalg::ln2();
}

// N0 / sigma^2: identity, or C^H C.
CMat normalized_noise(int dim, const CMat* combiner) {
  if (combiner) return linalg::hermitize(combiner->adjoint() * (*combiner));
  return CMat::Identity(dim, dim);
}

int out_dim(const SampleSet& set, const CMat* combiner) {
  return combiner ? static_cast<int>(combiner->cols()) : set.mr;
}

// L^H T' L with N0' = L L^H, so |I - N0' T'| = |I - L^H T' L|.
CMat whitened(const CMat& t_prime, const CMat& n0) {
  Eigen::LLT<CMat> llt(n0);
  if (llt.info() != Eigen::Success) throw ShapeError("combiner must have full column rank");
  const CMat l = llt.matrixL();
  return linalg::hermitize(l.adjoint() * t_prime * l);
}

}  // namespace

CMat aggregate_signal(const Sample& s, const std::vector<CMat>& r, int n, const CMat* combiner) {
  CMat j = CMat::Zero(s.a[n].rows(), s.a[n].rows());
  for (int u = 0; u < s.num_bs(); ++u) {
    const CMat g = s.channel(n, u);
    j += g * r[u] * g.adjoint();
  }
  if (combiner) j = combiner->adjoint() * j * (*combiner);
  return linalg::hermitize(j);
}

double rate_D(const SampleSet& set, const std::vector<CMat>& r, const CMat& q, int n, const CMat* combiner) {
  const double s2 = set.noise_power;
  const int d = out_dim(set, combiner);
  if (q.rows() != d || q.cols() != d) throw ShapeError("rate_D: Q has the wrong size");
  const CMat qn = linalg::hermitize(q) / s2;
  const double log_q = log2det(qn, "rate_D: Q is not positive definite");
  const CMat base = normalized_noise(d, combiner) + qn;
  double acc = 0.0;
  for (const auto& s : set.samples) {
    acc += log2det(aggregate_signal(s, r, n, combiner) / s2 + base, "rate_D: covariance not PD");
  }
  return acc / static_cast<double>(set.size()) - log_q;
}

double rate_D_floored(const SampleSet& set, const std::vector<CMat>& r, const CMat& q, int n, const CMat* combiner) {
  const int d = out_dim(set, combiner);
  return rate_D(set, r, q + kRateQFloor * set.noise_power * CMat::Identity(d, d), n, combiner);
}

double RateLinearR::evaluate(const std::vector<CMat>& r) const {
  double acc = 0.0;
  for (std::size_t u = 0; u < w.size(); ++u) acc += (w[u] * r[u]).trace().real();
  return constant + acc / linalg::ln2();
}

RateLinearR surrogate_Dhat_linear(const SampleSet& set, const std::vector<CMat>& r_tilde, const CMat& q, int n,
                                  const CMat* combiner) {
  const double s2 = set.noise_power;
  const int d = out_dim(set, combiner);
  const CMat qn = linalg::hermitize(q) / s2;
  const double log_q = log2det(qn, "surrogate_Dhat: Q is not positive definite");
  const CMat base = normalized_noise(d, combiner) + qn;
  RateLinearR lin;
  lin.w.assign(set.num_bs, CMat::Zero(set.mt, set.mt));
  double acc = 0.0;
  double lin_at_tilde = 0.0;
  const double inv_s = 1.0 / static_cast<double>(set.size());
  for (const auto& s : set.samples) {
    const CMat sigma = aggregate_signal(s, r_tilde, n, combiner) / s2 + base;
    acc += log2det(sigma, "surrogate_Dhat: covariance not PD");
    const CMat sigma_inv = linalg::inverse_hpd(sigma) / s2;  // physical units
    for (int u = 0; u < set.num_bs; ++u) {
      CMat g = s.channel(n, u);
      if (combiner) g = combiner->adjoint() * g;
      const CMat wu = linalg::hermitize(g.adjoint() * sigma_inv * g);
      lin.w[u] += inv_s * wu;
      lin_at_tilde += inv_s * (wu * r_tilde[u]).trace().real();
    }
  }
  lin.constant = acc * inv_s - log_q - lin_at_tilde / linalg::ln2();
  return lin;
}

double surrogate_Dhat(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& r_tilde,
                      const CMat& q, int n, const CMat* combiner) {
  return surrogate_Dhat_linear(set, r_tilde, q, n, combiner).evaluate(r);
}

double rate_D_T(const SampleSet& set, const std::vector<CMat>& r, const CMat& t, int n, const CMat* combiner) {
  const double s2 = set.noise_power;
  const int d = out_dim(set, combiner);
  if (t.rows() != d || t.cols() != d) throw ShapeError("rate_D_T: T has the wrong size");
  const CMat tp = linalg::hermitize(t) * s2;
  if (!linalg::logdet_hpd(tp)) throw RateUnbounded("rate_D_T: T is not positive definite");
  const CMat n0 = normalized_noise(d, combiner);
  const double tail = log2det(CMat::Identity(d, d) - whitened(tp, n0), "rate_D_T: T at the boundary");
  double acc = 0.0;
  for (const auto& s : set.samples) {
    const CMat jh = linalg::sqrtm_psd(aggregate_signal(s, r, n, combiner) / s2);
    acc += log2det(CMat::Identity(d, d) + jh * tp * jh, "rate_D_T: covariance not PD");
  }
  return acc / static_cast<double>(set.size()) - tail;
}

double RateLinearT::evaluate(const CMat& t) const {
  const CMat tp = linalg::hermitize(t) * noise_power;
  const int d = static_cast<int>(t.rows());
  return constant + (w * tp).trace().real() / linalg::ln2() -
         log2det(CMat::Identity(d, d) - whitened(tp, n0), "surrogate_Dtilde: T at the boundary");
}

RateLinearT surrogate_Dtilde_linear(const SampleSet& set, const std::vector<CMat>& r_bar, const CMat& t_bar, int n,
                                    const CMat* combiner) {
  const double s2 = set.noise_power;
  const int d = out_dim(set, combiner);
  const CMat tp = linalg::hermitize(t_bar) * s2;
  RateLinearT lin;
  lin.noise_power = s2;
  lin.n0 = normalized_noise(d, combiner);
  lin.w = CMat::Zero(d, d);
  const double inv_s = 1.0 / static_cast<double>(set.size());
  double acc = 0.0;
  double lin_at_bar = 0.0;
  for (const auto& s : set.samples) {
    const CMat jh = linalg::sqrtm_psd(aggregate_signal(s, r_bar, n, combiner) / s2);
    const CMat omega = CMat::Identity(d, d) + jh * tp * jh;
    acc += log2det(omega, "surrogate_Dtilde: covariance not PD");
    const CMat wk = linalg::hermitize(jh * linalg::inverse_hpd(omega) * jh);
    lin.w += inv_s * wk;
    lin_at_bar += inv_s * (wk * tp).trace().real();
  }
  lin.constant = acc * inv_s - lin_at_bar / linalg::ln2();
  return lin;
}

double surrogate_Dtilde(const SampleSet& set, const std::vector<CMat>& r_bar, const CMat& t_bar, const CMat& t,
                        int n, const CMat* combiner) {
  return surrogate_Dtilde_linear(set, r_bar, t_bar, n, combiner).evaluate(t);
}

CMat q_from_t(const CMat& t, double noise_power, const CMat* combiner) {
  const int d = static_cast<int>(t.rows());
  return linalg::hermitize(linalg::inverse_hpd(linalg::hermitize(t)) - noise_power * normalized_noise(d, combiner));
}

CMat t_from_q(const CMat& q, double noise_power, const CMat* combiner) {
  const int d = static_cast<int>(q.rows());
  return linalg::inverse_hpd(linalg::hermitize(q) + noise_power * normalized_noise(d, combiner));
}

}  // namespace netsense
