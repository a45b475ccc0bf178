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

#include "netsense/fim.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "netsense/linalg.hpp"

namespace netsense {

namespace {

std::atomic<bool> g_mutation{false};

// (conj(bl_k) * s(k,l) * br_l)
CMat bsb(const CVec& bl, const CMat& s, const CVec& br) {
  return bl.conjugate().asDiagonal() * s * br.asDiagonal();
}

// (conj(bl_k) * s(k,l))
CMat bs(const CVec& bl, const CMat& s) { return bl.conjugate().asDiagonal() * s; }

void check_sizes(const Sample& s, std::size_t rx, std::size_t tx) {
  if (static_cast<int>(rx) != s.num_bs() || static_cast<int>(tx) != s.num_bs()) {
    throw ShapeError("FIM blocks: one gram per BS required");
  }
}

// Gram of a Hermitian basis element: (X^H E Y)(k,l) over the nonzero entries of E.
CMat sparse_gram(const CMat& x, const std::vector<linalg::HermitianBasis::Entry>& e, const CMat& y) {
  CMat g = CMat::Zero(x.cols(), y.cols());
  for (const auto& en : e) g += en.value * x.row(en.row).adjoint() * y.row(en.col);
  return g;
}

}  // namespace

RxGram rx_gram(const CMat& a, const CMat& da, const CMat& oinv) {
  if (oinv.rows() != a.rows() || oinv.cols() != a.rows()) throw ShapeError("rx_gram: weighting size mismatch");
  const CMat wa = oinv * a;
  const CMat wda = oinv * da;
  return {a.adjoint() * wa, da.adjoint() * wda, a.adjoint() * wda, da.adjoint() * wa};
}

TxGram tx_gram(const CMat& v, const CMat& dv, const CMat& r) {
  if (r.rows() != v.rows() || r.cols() != v.rows()) throw ShapeError("tx_gram: covariance size mismatch");
  const CMat rc = r.conjugate();
  const CMat rv = rc * v;
  const CMat rdv = rc * dv;
  return {v.adjoint() * rv, dv.adjoint() * rdv, dv.adjoint() * rv, v.adjoint() * rdv};
}

TxGram zero_tx_gram(int k) {
  const CMat z = CMat::Zero(k, k);
  return {z, z, z, z};
}

RxGram zero_rx_gram(int k) {
  const CMat z = CMat::Zero(k, k);
  return {z, z, z, z};
}

std::vector<RxGram> rx_grams(const Sample& s, const std::vector<CMat>& oinv, const std::vector<CMat>* combiners) {
  if (static_cast<int>(oinv.size()) != s.num_bs()) throw ShapeError("rx_grams: one weighting per BS required");
  std::vector<RxGram> out;
  out.reserve(oinv.size());
  for (int n = 0; n < s.num_bs(); ++n) {
    if (combiners) {
      const CMat& c = (*combiners)[n];
      out.push_back(rx_gram(c.adjoint() * s.a[n], c.adjoint() * s.da[n], oinv[n]));
    } else {
      out.push_back(rx_gram(s.a[n], s.da[n], oinv[n]));
    }
  }
  return out;
}

std::vector<TxGram> tx_grams(const Sample& s, const std::vector<CMat>& r) {
  if (static_cast<int>(r.size()) != s.num_bs()) throw ShapeError("tx_grams: one covariance per BS required");
  std::vector<TxGram> out;
  out.reserve(r.size());
  for (int n = 0; n < s.num_bs(); ++n) out.push_back(tx_gram(s.v[n], s.dv[n], r[n]));
  return out;
}

CMat block_F1(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx) {
  check_sizes(s, rx.size(), tx.size());
  const int n_bs = s.num_bs();
  const int k = s.num_targets();
  CMat f = CMat::Zero(n_bs * k, n_bs * k);
  for (int i = 0; i < n_bs; ++i) {
    for (int n = 0; n < n_bs; ++n) {
      CMat blk = CMat::Zero(k, k);
      if (n == i) {
        for (int u = 0; u < n_bs; ++u) {
          const CVec bui = s.b.row(u, i);
          const CVec biu = s.b.row(i, u);
          blk += rx[u].aa.cwiseProduct(bsb(bui, tx[i].dd, bui));
          blk += rx[i].dd.cwiseProduct(bsb(biu, tx[u].vv, biu));
        }
        const CVec bii = s.b.row(i, i);
        blk += rx[i].ad.cwiseProduct(bsb(bii, tx[i].dv, bii));
        const double sign = g_mutation.load(std::memory_order_relaxed) ? -1.0 : 1.0;
        blk += sign * rx[i].da.cwiseProduct(bsb(bii, tx[i].vd, bii));
      } else {
        const CVec bin = s.b.row(i, n);
        const CVec bni = s.b.row(n, i);
        blk += rx[i].da.cwiseProduct(bsb(bin, tx[n].vd, bin));
        blk += rx[n].ad.cwiseProduct(bsb(bni, tx[i].dv, bni));
      }
      f.block(i * k, n * k, k, k) = blk;
    }
  }
  return f;
}

CMat block_F2(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx) {
  check_sizes(s, rx.size(), tx.size());
  const int n_bs = s.num_bs();
  const int k = s.num_targets();
  const FimLayout lay(n_bs, k);
  CMat f = CMat::Zero(lay.nk(), lay.nnk());
  for (int i = 0; i < n_bs; ++i) {
    for (int n = 0; n < n_bs; ++n) {
      for (int u = 0; u < n_bs; ++u) {
        if (n != i && u != i) continue;
        CMat blk = CMat::Zero(k, k);
        if (n == i) blk += rx[i].da.cwiseProduct(bs(s.b.row(i, u), tx[u].vv));
        if (u == i) blk += rx[n].aa.cwiseProduct(bs(s.b.row(n, i), tx[i].dv));
        f.block(i * k, lay.b_index(n, u, 0), k, k) = blk;
      }
    }
  }
  return f;
}

CMat block_F3(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx) {
  check_sizes(s, rx.size(), tx.size());
  const int n_bs = s.num_bs();
  const int k = s.num_targets();
  const FimLayout lay(n_bs, k);
  CMat f = CMat::Zero(lay.nnk(), lay.nnk());
  for (int n = 0; n < n_bs; ++n) {
    for (int u = 0; u < n_bs; ++u) {
      const int o = lay.b_index(n, u, 0);
      f.block(o, o, k, k) = rx[n].aa.cwiseProduct(tx[u].vv);
    }
  }
  return f;
}

CMat block_F1(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& oinv) {
  return block_F1(s, rx_grams(s, oinv), tx_grams(s, r));
}

CMat block_F2(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& oinv) {
  return block_F2(s, rx_grams(s, oinv), tx_grams(s, r));
}

CMat block_F3(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& oinv) {
  return block_F3(s, rx_grams(s, oinv), tx_grams(s, r));
}

Mat assemble_F0_zeta(const CMat& f1, const CMat& f2, const CMat& f3) {
  const Eigen::Index a = f1.rows();
  const Eigen::Index b = f3.rows();
  if (f1.cols() != a || f2.rows() != a || f2.cols() != b || f3.cols() != b) {
    throw ShapeError("assemble_F0_zeta: inconsistent block sizes");
  }
  Mat f(a + 2 * b, a + 2 * b);
  f.block(0, 0, a, a) = f1.real();
  f.block(0, a, a, b) = f2.real();
  f.block(0, a + b, a, b) = -f2.imag();
  f.block(a, 0, b, a) = f2.real().transpose();
  f.block(a, a, b, b) = f3.real();
  f.block(a, a + b, b, b) = -f3.imag();
  f.block(a + b, 0, b, a) = -f2.imag().transpose();
  f.block(a + b, a, b, b) = -f3.imag().transpose();
  f.block(a + b, a + b, b, b) = f3.real();
  return linalg::symmetrize(2.0 * f);
}

Mat chain_rule_U(const Sample& s) {
  const FimLayout lay(s.num_bs(), s.num_targets());
  Mat u = Mat::Zero(lay.xi_dim(), lay.zeta_dim());
  for (int n = 0; n < lay.num_bs; ++n) {
    for (int k = 0; k < lay.num_targets; ++k) {
      u(2 * k, lay.theta_index(n, k)) = s.jacobian[n](0, k);
      u(2 * k + 1, lay.theta_index(n, k)) = s.jacobian[n](1, k);
    }
  }
  const int nb = 2 * lay.nnk();
  u.block(lay.position_dim(), lay.nk(), nb, nb).setIdentity();
  return u;
}

Mat prior_fim(const std::vector<GaussianPrior>& priors, int num_bs) {
  const FimLayout lay(num_bs, static_cast<int>(priors.size()));
  Mat f = Mat::Zero(lay.xi_dim(), lay.xi_dim());
  for (int k = 0; k < lay.num_targets; ++k) {
    const double w = 1.0 / (priors[k].radius * priors[k].radius);
    f(2 * k, 2 * k) = w;
    f(2 * k + 1, 2 * k + 1) = w;
  }
  return f;
}

Mat sample_fim_xi(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx) {
  const FimLayout lay(s.num_bs(), s.num_targets());
  const Mat f0 = assemble_F0_zeta(block_F1(s, rx, tx), block_F2(s, rx, tx), block_F3(s, rx, tx));
  // U is block diagonal: the theta->q map on the first block, identity on b.
  Mat uq = Mat::Zero(lay.position_dim(), lay.nk());
  for (int n = 0; n < lay.num_bs; ++n) {
    for (int k = 0; k < lay.num_targets; ++k) {
      uq(2 * k, lay.theta_index(n, k)) = s.jacobian[n](0, k);
      uq(2 * k + 1, lay.theta_index(n, k)) = s.jacobian[n](1, k);
    }
  }
  const int p = lay.position_dim();
  const int a = lay.nk();
  const int nb = 2 * lay.nnk();
  Mat f(lay.xi_dim(), lay.xi_dim());
  f.block(0, 0, p, p) = uq * f0.block(0, 0, a, a) * uq.transpose();
  f.block(0, p, p, nb) = uq * f0.block(0, a, a, nb);
  f.block(p, 0, nb, p) = f.block(0, p, p, nb).transpose();
  f.block(p, p, nb, nb) = f0.block(a, a, nb, nb);
  return f;
}

std::vector<CMat> noise_inverse(const std::vector<CMat>& q, double noise_power) {
  std::vector<CMat> out;
  out.reserve(q.size());
  for (const auto& qn : q) {
    out.push_back(linalg::inverse_hpd(linalg::hermitize(qn) + noise_power * CMat::Identity(qn.rows(), qn.cols())));
  }
  return out;
}

Mat data_fim(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& oinv,
             const std::vector<CMat>* combiners) {
  const FimLayout lay(set.num_bs, set.num_targets);
  Mat acc = Mat::Zero(lay.xi_dim(), lay.xi_dim());
  for (const auto& s : set.samples) {
    acc += sample_fim_xi(s, rx_grams(s, oinv, combiners), tx_grams(s, r));
  }
  acc /= static_cast<double>(set.size());
  return linalg::symmetrize(acc);
}

Mat pfim(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& q) {
  return pfim_from_oinv(set, r, noise_inverse(q, set.noise_power));
}

Mat pfim_from_oinv(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& oinv,
                   const std::vector<CMat>* combiners) {
  return data_fim(set, r, oinv, combiners) + prior_fim(set.priors, set.num_bs);
}

Vec inverse_diagonal(const Mat& f, int keep, bool allow_pseudo_inverse, PcrbResult* info) {
  const Eigen::Index n = f.rows();
  if (f.cols() != n) throw ShapeError("inverse_diagonal: matrix must be square");
  std::vector<Eigen::Index> idx;
  int dropped = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (f(i, i) > 0.0) {
      idx.push_back(i);
    } else if (i >= keep && f(i, i) == 0.0 && f.row(i).cwiseAbs().maxCoeff() == 0.0) {
      ++dropped;
    } else {
      throw SingularFim("FIM has a nonpositive diagonal entry");
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Mat g(m, m);
  Vec d(m);
  for (Eigen::Index a = 0; a < m; ++a) d(a) = 1.0 / std::sqrt(f(idx[a], idx[a]));
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) g(a, b) = d(a) * f(idx[a], idx[b]) * d(b);
  }
  g = linalg::symmetrize(g);
  Vec diag_inv(m);
  bool pinv = false;
  Eigen::LLT<Mat> llt(g);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Mat l_inv = llt.matrixL().solve(Mat::Identity(m, m));
    diag_inv = l_inv.colwise().squaredNorm().transpose();
    ok = diag_inv.allFinite();
  }
  if (!ok) {
    if (!allow_pseudo_inverse) throw SingularFim("FIM is not positive definite");
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Vec& ev = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    Vec inv_ev = Vec::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (ev(i) > cutoff) inv_ev(i) = 1.0 / ev(i);
    }
    diag_inv = (es.eigenvectors().array().square().matrix() * inv_ev);
    pinv = true;
  }
  Vec out = Vec::Zero(n);
  for (Eigen::Index a = 0; a < m; ++a) out(idx[a]) = diag_inv(a) * d(a) * d(a);
  if (info) {
    info->pseudo_inverse = pinv;
    info->dropped = dropped;
  }
  return out;
}

PcrbResult pcrb_checked(const Mat& pfim_m, int num_targets, bool allow_pseudo_inverse) {
  PcrbResult res;
  const Vec d = inverse_diagonal(pfim_m, 2 * num_targets, allow_pseudo_inverse, &res);
  res.value = d.head(2 * num_targets).sum();
  return res;
}

double pcrb(const Mat& pfim_m, int num_targets) { return pcrb_checked(pfim_m, num_targets, false).value; }

FimBundle build_bundle(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& q) {
  FimBundle fb;
  fb.layout = FimLayout(set.num_bs, set.num_targets);
  const auto oinv = noise_inverse(q, set.noise_power);
  fb.f0_xi = Mat::Zero(fb.layout.xi_dim(), fb.layout.xi_dim());
  for (const auto& s : set.samples) {
    const auto rx = rx_grams(s, oinv);
    const auto tx = tx_grams(s, r);
    fb.f1.push_back(block_F1(s, rx, tx));
    fb.f2.push_back(block_F2(s, rx, tx));
    fb.f3.push_back(block_F3(s, rx, tx));
    fb.f0_zeta.push_back(assemble_F0_zeta(fb.f1.back(), fb.f2.back(), fb.f3.back()));
    fb.u.push_back(chain_rule_U(s));
    fb.f0_xi += fb.u.back() * fb.f0_zeta.back() * fb.u.back().transpose();
  }
  fb.f0_xi = linalg::symmetrize(fb.f0_xi / static_cast<double>(set.size()));
  fb.prior = prior_fim(set.priors, set.num_bs);
  fb.total = fb.f0_xi + fb.prior;
  return fb;
}

void write_matrix_csv(const std::string& path, const Mat& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

Mat AffineFim::evaluate(const Vec& x) const {
  if (x.size() != size()) throw ShapeError("AffineFim::evaluate: wrong parameter count");
  Mat f = constant;
  for (int k = 0; k < size(); ++k) {
    if (x(k) != 0.0) f += x(k) * coeffs[k];
  }
  return f;
}

AffineFim pfim_affine_in_R(const SampleSet& set, const std::vector<CMat>& oinv, const std::vector<CMat>* combiners) {
  const FimLayout lay(set.num_bs, set.num_targets);
  const linalg::HermitianBasis basis(set.mt);
  AffineFim af;
  af.constant = prior_fim(set.priors, set.num_bs);
  af.coeffs.assign(static_cast<std::size_t>(set.num_bs) * basis.size(), Mat::Zero(lay.xi_dim(), lay.xi_dim()));
  const double inv_s = 1.0 / static_cast<double>(set.size());
  for (const auto& s : set.samples) {
    const auto rx = rx_grams(s, oinv, combiners);
    std::vector<TxGram> tx(set.num_bs, zero_tx_gram(set.num_targets));
    for (int u = 0; u < set.num_bs; ++u) {
      for (int p = 0; p < basis.size(); ++p) {
        // R* = E* has the conjugated values on the same entries.
        auto e = basis.entries(p);
        for (auto& en : e) en.value = std::conj(en.value);
        tx[u] = {sparse_gram(s.v[u], e, s.v[u]), sparse_gram(s.dv[u], e, s.dv[u]),
                 sparse_gram(s.dv[u], e, s.v[u]), sparse_gram(s.v[u], e, s.dv[u])};
        af.coeffs[static_cast<std::size_t>(u) * basis.size() + p] += inv_s * sample_fim_xi(s, rx, tx);
      }
      tx[u] = zero_tx_gram(set.num_targets);
    }
  }
  for (auto& c : af.coeffs) c = linalg::symmetrize(c);
  return af;
}

AffineFim pfim_affine_in_T(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>* combiners) {
  const FimLayout lay(set.num_bs, set.num_targets);
  const int dim = combiners ? static_cast<int>((*combiners)[0].cols()) : set.mr;
  const linalg::HermitianBasis basis(dim);
  AffineFim af;
  af.constant = prior_fim(set.priors, set.num_bs);
  af.coeffs.assign(static_cast<std::size_t>(set.num_bs) * basis.size(), Mat::Zero(lay.xi_dim(), lay.xi_dim()));
  const double inv_s = 1.0 / static_cast<double>(set.size());
  for (const auto& s : set.samples) {
    const auto tx = tx_grams(s, r);
    std::vector<RxGram> rx(set.num_bs, zero_rx_gram(set.num_targets));
    for (int n = 0; n < set.num_bs; ++n) {
      CMat a = s.a[n];
      CMat da = s.da[n];
      if (combiners) {
        a = (*combiners)[n].adjoint() * s.a[n];
        da = (*combiners)[n].adjoint() * s.da[n];
      }
      for (int p = 0; p < basis.size(); ++p) {
        const auto& e = basis.entries(p);
        rx[n] = {sparse_gram(a, e, a), sparse_gram(da, e, da), sparse_gram(a, e, da), sparse_gram(da, e, a)};
        af.coeffs[static_cast<std::size_t>(n) * basis.size() + p] += inv_s * sample_fim_xi(s, rx, tx);
      }
      rx[n] = zero_rx_gram(set.num_targets);
    }
  }
  for (auto& c : af.coeffs) c = linalg::symmetrize(c);
  return af;
}

namespace testing_hooks {
void set_fim_mutation(bool enabled) { g_mutation.store(enabled); }
bool fim_mutation() { return g_mutation.load(); }
}  // namespace testing_hooks

}  // namespace netsense
