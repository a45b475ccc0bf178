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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "netsense/optimizer.hpp"

namespace netsense {

struct MusicOptions {
  int snapshots = 256;
  double snr_db = 10.0;     // per-antenna signal-to-noise ratio of the probing snapshots
  double grid_deg = 0.1;
  std::uint64_t seed = 7;
};

/// MUSIC pseudo-spectrum peaks of a sample covariance. Returns the K
/// strongest local maxima in ascending angle, each refined by a parabola
/// through the neighbouring grid values. AoaFailure when fewer peaks exist.
std::vector<double> music(const CMat& covariance, int num_sources, double grid_deg = 0.1);

/// Sample covariance at BS n of simulated probing snapshots with targets at
/// the given positions and R_u = (Pbar_u / Mt) I.
CMat probing_covariance(const Scenario& scenario, const std::vector<Vec2>& positions, int n,
                        const MusicOptions& options, std::mt19937_64& rng);

/// Per-BS angle estimates, column k associated with target k by matching
/// against the angles of the prior centers. AoaFailure carries whatever was
/// estimated before the failure.
std::vector<std::vector<double>> estimate_aoa(const Scenario& scenario, const MusicOptions& options = {});

/// [A(theta), P_A^perp dA(theta)], Mr x 2K. DegenerateAngles when A is rank
/// deficient.
CMat delta_matrix(const std::vector<double>& theta, int mr);

/// Orthonormal basis of span(Delta), columns ordered by decreasing
/// eigenvalue of Delta Delta^H.
CMat beamformers(const std::vector<double>& theta, int mr);

enum class BeamformerKind {
  proposed,   // E_r, Lr = 2K
  reduced,    // leading 2K-1 columns of E_r
  augmented,  // E_r plus one orthogonal vector, Lr = 2K+1
  dft,        // 2K DFT columns nearest the estimated angles
  identity,   // C = I, no reduction
};

const char* to_string(BeamformerKind kind);
BeamformerKind beamformer_kind_from_string(const std::string& s);

struct EbcPlan {
  BeamformerKind kind = BeamformerKind::proposed;
  std::vector<std::vector<double>> angles;  // [n][k]
  std::vector<CMat> delta;                  // Mr x 2K
  std::vector<CMat> combiners;              // Mr x Lr, orthonormal columns

  int lr() const { return combiners.empty() ? 0 : static_cast<int>(combiners[0].cols()); }
};

EbcPlan make_plan(const std::vector<std::vector<double>>& angles, int mr, BeamformerKind kind = BeamformerKind::proposed);

/// PFIM of the reduced model y'' = C^H y + e'' with O'' = sigma^2 C^H C + Q''.
Mat fim_ebc(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& c,
            const std::vector<CMat>& qdd);

/// mean log2|C^H J C + sigma^2 C^H C + Q''| - log2|Q''| at BS n.
double rate_ebc(const SampleSet& set, const std::vector<CMat>& r, const CMat& c, const CMat& qdd, int n);

struct EbcOptions {
  OptimizerOptions optimizer;
  /// Prior to use after estimation; the sample set's own prior when empty.
  std::optional<std::vector<GaussianPrior>> refined_prior;
};

/// Algorithm III on the reduced model.
OptimizerReport optimize_ebc(const Scenario& scenario, const SampleSet& set, const EbcPlan& plan,
                             const EbcOptions& options = {});

void write_plan(std::ostream& os, const EbcPlan& plan);
EbcPlan read_plan(std::istream& is);

}  // namespace netsense
