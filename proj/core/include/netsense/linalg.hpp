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

#include <optional>
#include <span>
#include <vector>

#include "netsense/types.hpp"

namespace netsense::linalg {

inline double ln2() { return 0.69314718055994530942; }

Mat symmetrize(const Mat& a);
CMat hermitize(const CMat& a);

/// Natural-log determinant of a Hermitian positive definite matrix, or
/// nullopt when the Cholesky factorization fails.
std::optional<double> logdet_hpd(const CMat& a);

/// Inverse of a Hermitian positive definite matrix (Cholesky based).
/// Throws SingularFim when the matrix is not numerically PD.
CMat inverse_hpd(const CMat& a);

/// Principal square root of a Hermitian PSD matrix; negative eigenvalues
/// from roundoff are clamped to zero.
CMat sqrtm_psd(const CMat& a);

double min_eigenvalue(const CMat& a);
double min_eigenvalue(const Mat& a);

/// Projects onto the PSD cone by clamping eigenvalues at zero.
CMat project_psd(const CMat& a);

/// Real parameterization of an M x M Hermitian matrix with M^2 entries:
/// the M diagonal entries first, then (Re, Im) of every strictly upper
/// entry in row-major order.
class HermitianBasis {
 public:
  struct Entry {
    int row;
    int col;
    cd value;
  };

  explicit HermitianBasis(int dim);

  int dim() const { return dim_; }
  int size() const { return dim_ * dim_; }

  CMat to_matrix(std::span<const double> params) const;
  Vec to_params(const CMat& h) const;

  /// Nonzero entries of basis element k (one for diagonal, two otherwise).
  const std::vector<Entry>& entries(int k) const { return entries_[k]; }
  CMat element(int k) const;

  /// Coefficients c with Re tr(W X) = sum_k c_k x_k for Hermitian W.
  Vec trace_coefficients(const CMat& w) const;

  /// Indices of the diagonal parameters (their sum is the trace).
  int diagonal_index(int i) const { return i; }

 private:
  int dim_;
  std::vector<std::vector<Entry>> entries_;
};

}  // namespace netsense::linalg
