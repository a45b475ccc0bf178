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

#include "netsense/ebc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "netsense/fim.hpp"
#include "netsense/fronthaul.hpp"
#include "netsense/linalg.hpp"

namespace netsense {

namespace {

constexpr double kPi = std::numbers::pi;

/// Maps a broadside estimate in [-pi/2, pi/2] onto the branch of the
/// reference angle; the array only sees sin(theta).
double unfold(double broadside, double reference) {
  if (std::abs(reference) <= kPi / 2) return broadside;
  return (reference > 0.0 ? kPi : -kPi) - broadside;
}

/// Cheapest assignment of estimates to targets by |sin difference|.
std::vector<int> associate(const std::vector<double>& est, const std::vector<double>& pred) {
  const int k = static_cast<int>(pred.size());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  auto cost = [&](const std::vector<int>& p) {
    double c = 0.0;
    for (int i = 0; i < k; ++i) c += std::abs(std::sin(est[p[i]]) - std::sin(pred[i]));
    return c;
  };
  if (k <= 8) {
    std::vector<int> best = perm;
    double best_cost = cost(perm);
    while (std::next_permutation(perm.begin(), perm.end())) {
      const double c = cost(perm);
      if (c < best_cost) {
        best_cost = c;
        best = perm;
      }
    }
    return best;
  }
  // Greedy for large K.
  std::vector<bool> used(est.size(), false);
  for (int i = 0; i < k; ++i) {
    int arg = -1;
    for (std::size_t j = 0; j < est.size(); ++j) {
      if (used[j]) continue;
      if (arg < 0 || std::abs(std::sin(est[j]) - std::sin(pred[i])) < std::abs(std::sin(est[arg]) - std::sin(pred[i]))) {
        arg = static_cast<int>(j);
      }
    }
    used[arg] = true;
    perm[i] = arg;
  }
  return perm;
}

CMat orthonormal_complement_vector(const CMat& basis) {
  const int m = static_cast<int>(basis.rows());
  CVec best;
  double best_norm = -1.0;
  for (int i = 0; i < m; ++i) {
    CVec e = CVec::Zero(m);
    e(i) = 1.0;
    const CVec r = e - basis * (basis.adjoint() * e);
    if (r.norm() > best_norm) {
      best_norm = r.norm();
      best = r;
    }
  }
  if (best_norm < 1e-8) throw DegenerateAngles("no vector orthogonal to the beamformer span");
  return best / best_norm;
}

CMat dft_columns(const std::vector<double>& theta, int mr, int count) {
  if (count > mr) throw ShapeError("dft beamformer: more columns than antennas");
  // Column j steers to the spatial frequency 2j/Mr wrapped into [-1, 1).
  std::vector<std::pair<double, int>> rank;
  for (int j = 0; j < mr; ++j) {
    double f = 2.0 * j / mr;
    if (f >= 1.0) f -= 2.0;
    double dist = std::numeric_limits<double>::infinity();
    for (double t : theta) {
      double df = std::abs(f - std::sin(t));
      df = std::min(df, 2.0 - df);
      dist = std::min(dist, df);
    }
    rank.emplace_back(dist, j);
  }
  std::stable_sort(rank.begin(), rank.end());
  CMat c(mr, count);
  for (int i = 0; i < count; ++i) {
    const int j = rank[i].second;
    for (int m = 0; m < mr; ++m) c(m, i) = std::polar(1.0 / std::sqrt(static_cast<double>(mr)), 2.0 * kPi * j * m / mr);
  }
  return c;
}

}  // namespace

std::vector<double> music(const CMat& covariance, int num_sources, double grid_deg) {
  const int m = static_cast<int>(covariance.rows());
  if (num_sources < 1 || num_sources >= m) throw ShapeError("music: need 1 <= K < Mr");
  Eigen::SelfAdjointEigenSolver<CMat> es(linalg::hermitize(covariance));
  const CMat noise = es.eigenvectors().leftCols(m - num_sources);  // ascending eigenvalues
  const int points = static_cast<int>(std::floor(180.0 / grid_deg)) + 1;
  std::vector<double> grid(points);
  std::vector<double> spec(points);
  for (int i = 0; i < points; ++i) {
    grid[i] = (-90.0 + i * grid_deg) * kPi / 180.0;
    const double p = (noise.adjoint() * steering(grid[i], m)).squaredNorm();
    spec[i] = -10.0 * std::log10(std::max(p, 1e-300));
  }
  std::vector<std::pair<double, double>> peaks;  // (height, angle)
  for (int i = 1; i + 1 < points; ++i) {
    if (spec[i] > spec[i - 1] && spec[i] >= spec[i + 1]) {
      const double denom = spec[i - 1] - 2.0 * spec[i] + spec[i + 1];
      double offset = denom < 0.0 ? 0.5 * (spec[i - 1] - spec[i + 1]) / denom : 0.0;
      offset = std::clamp(offset, -0.5, 0.5);
      peaks.emplace_back(spec[i], grid[i] + offset * grid_deg * kPi / 180.0);
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> out;
  for (std::size_t i = 0; i < peaks.size() && static_cast<int>(out.size()) < num_sources; ++i) {
    out.push_back(peaks[i].second);
  }
  std::sort(out.begin(), out.end());
  if (static_cast<int>(out.size()) < num_sources) {
    throw AoaFailure("music: fewer peaks than sources", {out});
  }
  return out;
}

CMat probing_covariance(const Scenario& scenario, const std::vector<Vec2>& positions, int n,
                        const MusicOptions& options, std::mt19937_64& rng) {
  const Sample s = make_sample(scenario, positions);
  const int nb = scenario.num_bs();
  const int mt = scenario.mt;
  const int mr = scenario.mr;
  std::vector<CMat> g(nb);
  double signal = 0.0;
  for (int u = 0; u < nb; ++u) {
    g[u] = s.channel(n, u);
    signal += scenario.power_budget[u] / mt * g[u].squaredNorm();
  }
  signal /= mr;
  const double noise = signal / std::pow(10.0, options.snr_db / 10.0);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  auto cn = [&](int len, double var) {
    CVec z(len);
    const double sd = std::sqrt(var);
    for (int i = 0; i < len; ++i) z(i) = cd(normal(rng), normal(rng)) * sd;
    return z;
  };
  CMat cov = CMat::Zero(mr, mr);
  for (int t = 0; t < options.snapshots; ++t) {
    CVec y = cn(mr, noise);
    for (int u = 0; u < nb; ++u) y += g[u] * cn(mt, scenario.power_budget[u] / mt);
    cov += y * y.adjoint();
  }
  return linalg::hermitize(cov / static_cast<double>(options.snapshots));
}

std::vector<std::vector<double>> estimate_aoa(const Scenario& scenario, const MusicOptions& options) {
  scenario.validate();
  const int nb = scenario.num_bs();
  const int k = scenario.num_targets();
  if (scenario.mr <= k) throw ShapeError("estimate_aoa: need Mr > K");
  std::vector<Vec2> centers;
  for (const auto& t : scenario.targets) centers.push_back(t.center);
  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<double>> out;
  for (int n = 0; n < nb; ++n) {
    std::vector<double> pred(k);
    for (int j = 0; j < k; ++j) pred[j] = angle_between(scenario.bs_positions[n], centers[j]);
    const CMat cov = probing_covariance(scenario, centers, n, options, rng);
    std::vector<double> est;
    try {
      est = music(cov, k, options.grid_deg);
    } catch (const AoaFailure& e) {
      auto partial = out;
      partial.push_back(e.partial().empty() ? std::vector<double>{} : e.partial()[0]);
      throw AoaFailure("estimate_aoa: fewer than K peaks at BS " + std::to_string(n), partial);
    }
    const std::vector<int> perm = associate(est, pred);
    std::vector<double> row(k);
    for (int j = 0; j < k; ++j) row[j] = unfold(est[perm[j]], pred[j]);
    out.push_back(row);
  }
  return out;
}

CMat delta_matrix(const std::vector<double>& theta, int mr) {
  const int k = static_cast<int>(theta.size());
  const CMat a = steering_matrix(theta, mr);
  const CMat da = steering_derivative_matrix(theta, mr);
  Eigen::ColPivHouseholderQR<CMat> qr(a);
  qr.setThreshold(1e-10);
  if (k > mr || qr.rank() < k) throw DegenerateAngles("steering matrix is rank deficient");
  const CMat gram = a.adjoint() * a;
  const CMat proj = CMat::Identity(mr, mr) - a * gram.ldlt().solve(a.adjoint());
  CMat delta(mr, 2 * k);
  delta << a, proj * da;
  return delta;
}

CMat beamformers(const std::vector<double>& theta, int mr) {
  const CMat delta = delta_matrix(theta, mr);
  const int cols = static_cast<int>(delta.cols());
  if (cols > mr) throw ShapeError("beamformers: 2K exceeds Mr");
  Eigen::SelfAdjointEigenSolver<CMat> es(linalg::hermitize(delta * delta.adjoint()));
  const Vec& ev = es.eigenvalues();
  if (ev(mr - cols) <= 1e-10 * ev(mr - 1)) throw DegenerateAngles("Delta has rank below 2K");
  CMat c(mr, cols);
  for (int i = 0; i < cols; ++i) c.col(i) = es.eigenvectors().col(mr - 1 - i);
  return c;
}

const char* to_string(BeamformerKind kind) {
  switch (kind) {
    case BeamformerKind::proposed: return "proposed";
    case BeamformerKind::reduced: return "reduced";
    case BeamformerKind::augmented: return "augmented";
    case BeamformerKind::dft: return "dft";
    case BeamformerKind::identity: return "identity";
  }
  return "proposed";
}

BeamformerKind beamformer_kind_from_string(const std::string& s) {
  for (auto k : {BeamformerKind::proposed, BeamformerKind::reduced, BeamformerKind::augmented, BeamformerKind::dft,
                 BeamformerKind::identity}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown beamformer kind: " + s);
}

EbcPlan make_plan(const std::vector<std::vector<double>>& angles, int mr, BeamformerKind kind) {
  EbcPlan plan;
  plan.kind = kind;
  plan.angles = angles;
  for (const auto& th : angles) {
    const int k = static_cast<int>(th.size());
    plan.delta.push_back(delta_matrix(th, mr));
    switch (kind) {
      case BeamformerKind::proposed:
        plan.combiners.push_back(beamformers(th, mr));
        break;
      case BeamformerKind::reduced:
        plan.combiners.push_back(beamformers(th, mr).leftCols(2 * k - 1));
        break;
      case BeamformerKind::augmented: {
        if (2 * k + 1 > mr) throw ShapeError("augmented beamformer needs Mr > 2K");
        const CMat e = beamformers(th, mr);
        CMat c(mr, 2 * k + 1);
        c << e, orthonormal_complement_vector(e);
        plan.combiners.push_back(c);
        break;
      }
      case BeamformerKind::dft:
        plan.combiners.push_back(dft_columns(th, mr, 2 * k));
        break;
      case BeamformerKind::identity:
        plan.combiners.push_back(CMat::Identity(mr, mr));
        break;
    }
  }
  return plan;
}

Mat fim_ebc(const SampleSet& set, const std::vector<CMat>& r, const std::vector<CMat>& c,
            const std::vector<CMat>& qdd) {
  if (static_cast<int>(c.size()) != set.num_bs || static_cast<int>(qdd.size()) != set.num_bs) {
    throw ShapeError("fim_ebc: one combiner and one Q per BS");
  }
  std::vector<CMat> oinv(set.num_bs);
  for (int n = 0; n < set.num_bs; ++n) {
    if (c[n].rows() != set.mr || qdd[n].rows() != c[n].cols() || qdd[n].cols() != c[n].cols()) {
      throw ShapeError("fim_ebc: combiner or Q has the wrong size");
    }
    oinv[n] = t_from_q(qdd[n], set.noise_power, &c[n]);
  }
  return pfim_from_oinv(set, r, oinv, &c);
}

double rate_ebc(const SampleSet& set, const std::vector<CMat>& r, const CMat& c, const CMat& qdd, int n) {
  if (qdd.rows() != c.cols()) throw ShapeError("rate_ebc: Q has the wrong size");
  return rate_D(set, r, qdd, n, &c);
}

OptimizerReport optimize_ebc(const Scenario& scenario, const SampleSet& set, const EbcPlan& plan,
                             const EbcOptions& options) {
  if (static_cast<int>(plan.combiners.size()) != set.num_bs) throw ShapeError("optimize_ebc: plan does not match");
  SampleSet local;
  const SampleSet* use = &set;
  if (options.refined_prior) {
    local = set;
    local.priors = *options.refined_prior;
    use = &local;
  }
  const DesignContext ctx = make_context(scenario, *use, &plan.combiners);
  return alternate(ctx, options.optimizer);
}

void write_plan(std::ostream& os, const EbcPlan& plan) {
  const int nb = static_cast<int>(plan.combiners.size());
  os << "netsense-ebc-plan 1\n";
  os << "kind " << to_string(plan.kind) << "\n";
  os << "num_bs " << nb << "\n";
  os.precision(17);
  for (int n = 0; n < nb; ++n) {
    const CMat& c = plan.combiners[n];
    os << "bs " << n << "\n";
    os << "angles " << plan.angles[n].size();
    for (double a : plan.angles[n]) os << ' ' << a;
    os << "\n";
    os << "combiner " << c.rows() << ' ' << c.cols() << "\n";
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) os << (j ? " " : "") << c(i, j).real() << ' ' << c(i, j).imag();
      os << "\n";
    }
  }
}

EbcPlan read_plan(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw IoError("plan: expected '" + word + "'");
  };
  expect("netsense-ebc-plan");
  int version = 0;
  is >> version;
  if (version != 1) throw IoError("plan: unsupported version");
  expect("kind");
  std::string kind;
  is >> kind;
  expect("num_bs");
  int nb = 0;
  is >> nb;
  if (!is || nb < 1) throw IoError("plan: bad BS count");
  EbcPlan plan;
  plan.kind = beamformer_kind_from_string(kind);
  for (int n = 0; n < nb; ++n) {
    expect("bs");
    int idx = -1;
    is >> idx;
    if (idx != n) throw IoError("plan: BS blocks out of order");
    expect("angles");
    std::size_t k = 0;
    is >> k;
    std::vector<double> th(k);
    for (auto& a : th) is >> a;
    expect("combiner");
    Eigen::Index rows = 0, cols = 0;
    is >> rows >> cols;
    if (!is || rows < 1 || cols < 1) throw IoError("plan: bad combiner size");
    CMat c(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        double re = 0.0, im = 0.0;
        is >> re >> im;
        c(i, j) = cd(re, im);
      }
    }
    if (!is) throw IoError("plan: truncated combiner");
    plan.angles.push_back(th);
    plan.delta.push_back(delta_matrix(th, static_cast<int>(rows)));
    plan.combiners.push_back(c);
  }
  return plan;
}

}  // namespace netsense
