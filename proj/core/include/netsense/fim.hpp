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

#include "netsense/scenario.hpp"

namespace netsense {

/// Parameter indexing. zeta = [theta (NK), b^R (N^2 K), b^I (N^2 K)],
/// xi = [q (2K), b^R, b^I]. theta_{n,k} sits at n*K+k and b_{n,u,k}
/// (receive n, transmit u) at (n*N+u)*K+k inside each b block.
struct FimLayout {
  int num_bs = 0;
  int num_targets = 0;

  FimLayout() = default;
  FimLayout(int n, int k) : num_bs(n), num_targets(k) {}

  int nk() const { return num_bs * num_targets; }
  int nnk() const { return num_bs * num_bs * num_targets; }
  int zeta_dim() const { return nk() + 2 * nnk(); }
  int xi_dim() const { return 2 * num_targets + 2 * nnk(); }
  int position_dim() const { return 2 * num_targets; }
  int theta_index(int n, int k) const { return n * num_targets + k; }
  int b_index(int n, int u, int k) const { return (n * num_bs + u) * num_targets + k; }
};

/// Receive-side Gram matrices of one BS with weighting W = O^{-1}:
/// aa = A^H W A, dd = dA^H W dA, ad = A^H W dA, da = dA^H W A.
struct RxGram {
  CMat aa, dd, ad, da;
};

/// Transmit-side Gram matrices of one BS: vv = V^H R* V, dd = dV^H R* dV,
/// dv = dV^H R* V, vd = V^H R* dV.
struct TxGram {
  CMat vv, dd, dv, vd;
};

RxGram rx_gram(const CMat& a, const CMat& da, const CMat& oinv);
TxGram tx_gram(const CMat& v, const CMat& dv, const CMat& r);
TxGram zero_tx_gram(int k);
RxGram zero_rx_gram(int k);

/// Per-sample receive and transmit grams for a design. `combiners`, when
/// given, replaces A_n by C_n^H A_n (and the weighting lives in the reduced
/// space).
std::vector<RxGram> rx_grams(const Sample& s, const std::vector<CMat>& oinv,
                             const std::vector<CMat>* combiners = nullptr);
std::vector<TxGram> tx_grams(const Sample& s, const std::vector<CMat>& r);

CMat block_F1(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx);
CMat block_F2(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx);
CMat block_F3(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx);

CMat block_F1(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& oinv);
CMat block_F2(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& oinv);
CMat block_F3(const Sample& s, const std::vector<CMat>& r, const std::vector<CMat>& oinv);

/// Real symmetric FIM of zeta from the complex blocks.
Mat assemble_F0_zeta(const CMat& f1, const CMat& f2, const CMat& f3);

/// d zeta / d xi laid out as (2K + 2N^2K) x (NK + 2N^2K).
Mat chain_rule_U(const Sample& s);

/// blockdiag(r_k^{-2} I_2) on the position block, zero elsewhere.
Mat prior_fim(const std::vector<GaussianPrior>& priors, int num_bs);

/// U F0zeta U^T for one sample without forming U.
Mat sample_fim_xi(const Sample& s, const std::vector<RxGram>& rx, const std::vector<TxGram>& tx);

/// O_n^{-1} = (sigma^2 I + Q_n)^{-1}.
std::vector<CMat> noise_inverse(const std::vector<CMat>& q, double noise_power);

/// Sample-average data FIM in xi (no prior).
Mat data_fim(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& oinv,
             const std::vector<CMat>* combiners = nullptr);

Mat pfim(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& q);
Mat pfim_from_oinv(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& oinv,
                   const std::vector<CMat>* combiners = nullptr);

struct PcrbResult {
  double value = 0.0;
  bool pseudo_inverse = false;  // factorization failed, value from eigen pseudo-inverse
  int dropped = 0;              // b coordinates with zero information removed
};

/// Diagonal of the inverse of a symmetric PD matrix using Jacobi scaling.
/// Nuisance coordinates (index >= keep) whose diagonal is exactly zero are
/// dropped; they carry no information and no coupling. Throws SingularFim.
Vec inverse_diagonal(const Mat& f, int keep, bool allow_pseudo_inverse, PcrbResult* info = nullptr);

/// Trace of the position block of the inverse. Throws SingularFim.
double pcrb(const Mat& pfim, int num_targets);
PcrbResult pcrb_checked(const Mat& pfim, int num_targets, bool allow_pseudo_inverse);

struct FimBundle {
  FimLayout layout;
  std::vector<CMat> f1, f2, f3;
  std::vector<Mat> f0_zeta;
  std::vector<Mat> u;
  Mat f0_xi;
  Mat prior;
  Mat total;
};

FimBundle build_bundle(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& q);

void write_matrix_csv(const std::string& path, const Mat& m);

/// PFIM as an affine function of a real parameter vector:
/// F(x) = constant + sum_k x_k coeffs[k].
struct AffineFim {
  Mat constant;
  std::vector<Mat> coeffs;
  Mat evaluate(const Vec& x) const;
  int size() const { return static_cast<int>(coeffs.size()); }
};

/// Parameters are the concatenated HermitianBasis(Mt) coordinates of R_1..R_N.
AffineFim pfim_affine_in_R(const SampleSet& set, const std::vector<CMat>& oinv,
                           const std::vector<CMat>* combiners = nullptr);

/// Parameters are the concatenated HermitianBasis coordinates of
/// T_n = O_n^{-1}; the dimension is Mr, or Lr when combiners are given.
AffineFim pfim_affine_in_T(const SampleSet& set, const std::vector<CMat>& r,
                           const std::vector<CMat>* combiners = nullptr);

namespace testing_hooks {
/// Flips the sign of one receive/transmit cross term in the diagonal F1
/// blocks. Used only to check that the oracles detect a corrupted formula.
void set_fim_mutation(bool enabled);
bool fim_mutation();
}  // namespace testing_hooks

}  // namespace netsense
