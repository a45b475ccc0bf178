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

#include "netsense/linalg.hpp"

#include <algorithm>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace netsense::linalg {

Mat symmetrize(const Mat& a) { return 0.5 * (a + a.transpose()); }

CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

std::optional<double> logdet_hpd(const CMat& a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0)) return std::nullopt;
    acc += 2.0 * std::log(d);
  }
  return acc;
}

CMat inverse_hpd(const CMat& a) {
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success) throw SingularFim("matrix is not Hermitian positive definite");
  return hermitize(llt.solve(CMat::Identity(a.rows(), a.cols())));
}

CMat sqrtm_psd(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double min_eigenvalue(const CMat& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double min_eigenvalue(const Mat& a) {
  if (a.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

CMat project_psd(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitize(a));
  Vec ev = es.eigenvalues().cwiseMax(0.0);
  return hermitize(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint());
}

HermitianBasis::HermitianBasis(int dim) : dim_(dim) {
  if (dim < 1) throw ShapeError("HermitianBasis: dimension must be positive");
  entries_.reserve(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i) entries_.push_back({{i, i, cd(1.0, 0.0)}});
  for (int i = 0; i < dim; ++i) {
    for (int j = i + 1; j < dim; ++j) {
      entries_.push_back({{i, j, cd(1.0, 0.0)}, {j, i, cd(1.0, 0.0)}});
      entries_.push_back({{i, j, cd(0.0, 1.0)}, {j, i, cd(0.0, -1.0)}});
    }
  }
}

CMat HermitianBasis::to_matrix(std::span<const double> params) const {
  if (static_cast<int>(params.size()) != size()) throw ShapeError("HermitianBasis::to_matrix: wrong parameter count");
  CMat h = CMat::Zero(dim_, dim_);
  for (int k = 0; k < size(); ++k) {
    for (const auto& e : entries_[k]) h(e.row, e.col) += params[k] * e.value;
  }
  return h;
}

Vec HermitianBasis::to_params(const CMat& h) const {
  if (h.rows() != dim_ || h.cols() != dim_) throw ShapeError("HermitianBasis::to_params: wrong matrix size");
  Vec p(size());
  int k = 0;
  for (int i = 0; i < dim_; ++i) p(k++) = h(i, i).real();
  for (int i = 0; i < dim_; ++i) {
    for (int j = i + 1; j < dim_; ++j) {
      const cd v = 0.5 * (h(i, j) + std::conj(h(j, i)));
      p(k++) = v.real();
      p(k++) = v.imag();
    }
  }
  return p;
}

CMat HermitianBasis::element(int k) const {
  CMat e = CMat::Zero(dim_, dim_);
  for (const auto& en : entries_[k]) e(en.row, en.col) = en.value;
  return e;
}

Vec HermitianBasis::trace_coefficients(const CMat& w) const {
  Vec c(size());
  for (int k = 0; k < size(); ++k) {
    cd acc = 0.0;
    // tr(W E) = sum_{(r,c)} W(c,r) E(r,c)
    for (const auto& e : entries_[k]) acc += w(e.col, e.row) * e.value;
    c(k) = acc.real();
  }
  return c;
}

}  // namespace netsense::linalg
