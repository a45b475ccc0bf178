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

#include "netsense/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "netsense/io.hpp"

namespace netsense {

namespace {

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemes[] = {
    {Scheme::alg3, "alg3"},     {Scheme::bench1, "bench1"}, {Scheme::bench2, "bench2"},
    {Scheme::bench3, "bench3"}, {Scheme::ebc, "ebc"},       {Scheme::bench4, "bench4"},
    {Scheme::bench5, "bench5"}, {Scheme::bench6, "bench6"}, {Scheme::bench7, "bench7"},
};

BeamformerKind kind_of(Scheme s) {
  switch (s) {
    case Scheme::bench4:
      return BeamformerKind::reduced;
    case Scheme::bench5:
      return BeamformerKind::augmented;
    case Scheme::bench6:
      return BeamformerKind::dft;
    case Scheme::bench7:
      return BeamformerKind::identity;
    default:
      return BeamformerKind::proposed;
  }
}

std::string join_flags(const std::vector<std::string>& flags) {
  if (flags.empty()) return "ok";
  std::string out;
  for (const auto& f : flags) {
    if (!out.empty()) out += "; ";
    out += f;
  }
  return out;
}

/// CSV-safe: no commas, quotes or newlines.
std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  }
  return s;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const char* to_string(Scheme s) {
  for (const auto& e : kSchemes) {
    if (e.scheme == s) return e.name;
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& s) {
  for (const auto& e : kSchemes) {
    if (s == e.name) return e.scheme;
  }
  throw ConfigError("unknown scheme '" + s + "'");
}

bool is_ebc_scheme(Scheme s) {
  return s == Scheme::ebc || s == Scheme::bench4 || s == Scheme::bench5 || s == Scheme::bench6 ||
         s == Scheme::bench7;
}

std::vector<Scheme> all_schemes() {
  std::vector<Scheme> out;
  for (const auto& e : kSchemes) out.push_back(e.scheme);
  return out;
}

ResultRow run_scheme(Scheme scheme, const Scenario& scenario, const SampleSet& set, const RunOptions& options) {
  ResultRow row;
  row.scheme = scheme;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const DesignContext ctx = make_context(scenario, set);
    const OptimizerOptions& opt = options.optimizer;
    std::vector<std::string> flags;
    switch (scheme) {
      case Scheme::alg3: {
        const OptimizerReport rep = alternate(ctx, opt);
        row.pcrb = rep.final.objective;
        row.outer_iters = rep.outer_iterations;
        flags = rep.flags;
        break;
      }
      case Scheme::bench1: {
        OptimizerReport rep;
        const DesignPoint start = init_feasible(ctx, 1.0, &flags);
        const DesignPoint p = sca_transmit(ctx, start, opt, &rep);
        row.pcrb = p.objective;
        row.outer_iters = 1;
        flags.insert(flags.end(), rep.flags.begin(), rep.flags.end());
        break;
      }
      case Scheme::bench2: {
        OptimizerReport rep;
        const DesignPoint start = init_feasible(ctx, opt.init_rate_fraction, &flags);
        const DesignPoint p = sca_compress(ctx, start, opt, &rep);
        row.pcrb = p.objective;
        row.outer_iters = 1;
        flags.insert(flags.end(), rep.flags.begin(), rep.flags.end());
        break;
      }
      case Scheme::bench3: {
        OptimizerReport rep;
        const std::vector<CMat> q(set.num_bs, CMat::Zero(set.mr, set.mr));
        const DesignPoint p = solve_transmit_unconstrained(ctx, q, opt, &rep);
        row.pcrb = p.objective;
        row.outer_iters = 1;
        flags = rep.flags;
        break;
      }
      default: {
        if (scenario.mr <= 2 * scenario.num_targets()) throw ShapeError("EBC needs Mr > 2K");
        const auto angles = estimate_aoa(scenario, options.music);
        const EbcPlan plan = make_plan(angles, scenario.mr, kind_of(scheme));
        EbcOptions eo;
        eo.optimizer = opt;
        const OptimizerReport rep = optimize_ebc(scenario, set, plan, eo);
        row.pcrb = rep.final.objective;
        row.outer_iters = rep.outer_iterations;
        flags = rep.flags;
        break;
      }
    }
    row.status = sanitize(join_flags(flags));
  } catch (const std::exception& e) {
    row.pcrb = std::numeric_limits<double>::quiet_NaN();
    row.status = sanitize(std::string("error: ") + e.what());
  }
  row.apcrb = row.pcrb / std::max(1, scenario.num_targets());
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

bool is_valid_axis(const std::string& axis) {
  return axis == "power_dbm" || axis == "fronthaul_bits" || axis == "num_targets" || axis == "num_bs" ||
         axis == "Mt" || axis == "Mr";
}

void apply_axis(Scenario& sc, const std::string& axis, double value) {
  auto as_count = [&](int lo, int hi) {
    const int v = static_cast<int>(std::lround(value));
    if (v != value || v < lo || v > hi) {
      throw ConfigError(axis + " value " + format_double(value) + " out of range");
    }
    return v;
  };
  if (axis == "power_dbm") {
    sc.power_budget.assign(sc.num_bs(), dbm_to_watt(value));
  } else if (axis == "fronthaul_bits") {
    if (!(value > 0)) throw ConfigError("fronthaul_bits must be positive");
    sc.fronthaul_cap.assign(sc.num_bs(), value);
  } else if (axis == "num_targets") {
    const auto ext = extended_targets();
    const int k = as_count(1, static_cast<int>(ext.size()));
    sc.targets.assign(ext.begin(), ext.begin() + k);
  } else if (axis == "num_bs") {
    const auto sites = hexagonal_sites();
    const int n = as_count(1, static_cast<int>(sites.size()));
    const double p = sc.power_budget.at(0);
    const double d = sc.fronthaul_cap.at(0);
    sc.bs_positions.assign(sites.begin(), sites.begin() + n);
    sc.power_budget.resize(n, p);
    sc.fronthaul_cap.resize(n, d);
  } else if (axis == "Mt") {
    sc.mt = as_count(1, 1024);
  } else if (axis == "Mr") {
    sc.mr = as_count(1, 1024);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "'");
  }
  sc.attenuation = Attenuation();  // redrawn below for the new shape
  sc.validate();
  refresh_attenuation(sc);
}

void apply_full_scale(Scenario& sc) {
  sc.mt = 8;
  sc.mr = 16;
  refresh_attenuation(sc);
}

void SweepSpec::validate() const {
  if (!is_valid_axis(axis)) throw ConfigError("unknown sweep axis '" + axis + "'");
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  if (schemes.empty()) throw ConfigError("sweep needs at least one scheme");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

SweepSpec parse_sweep_spec(const std::string& json_text, const std::string& base_dir) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sweep spec is not valid JSON: ") + e.what());
  }
  SweepSpec spec;
  try {
    spec.axis = j.at("axis").get<std::string>();
    for (const auto& v : j.at("values")) spec.values.push_back(v.get<double>());
    for (const auto& s : j.at("schemes")) spec.schemes.push_back(scheme_from_string(s.get<std::string>()));
    spec.scenario_path = j.value("scenario", std::string());
    spec.output_path = j.value("output", std::string());
    spec.threads = j.value("threads", 0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("sweep spec: ") + e.what());
  }
  if (!spec.scenario_path.empty() && !base_dir.empty() && std::filesystem::path(spec.scenario_path).is_relative()) {
    spec.scenario_path = (std::filesystem::path(base_dir) / spec.scenario_path).string();
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
  return parse_sweep_spec(io::read_file(path), std::filesystem::path(path).parent_path().string());
}

std::vector<ResultRow> sweep(const SweepSpec& spec, const Scenario& base, const RunOptions& options) {
  spec.validate();
  const std::size_t points = spec.values.size();
  const std::size_t per = spec.schemes.size();
  std::vector<ResultRow> rows(points * per);

  auto run_point = [&](std::size_t i) {
    const double value = spec.values[i];
    std::vector<ResultRow> out(per);
    try {
      Scenario sc = base;
      apply_axis(sc, spec.axis, value);
      const SampleSet set = draw_samples(sc);
      for (std::size_t s = 0; s < per; ++s) out[s] = run_scheme(spec.schemes[s], sc, set, options);
    } catch (const std::exception& e) {
      for (std::size_t s = 0; s < per; ++s) {
        out[s].scheme = spec.schemes[s];
        out[s].pcrb = out[s].apcrb = std::numeric_limits<double>::quiet_NaN();
        out[s].status = sanitize(std::string("error: ") + e.what());
      }
    }
    for (std::size_t s = 0; s < per; ++s) {
      out[s].axis = spec.axis;
      out[s].value = value;
      rows[i * per + s] = std::move(out[s]);
    }
  };

  unsigned workers = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(points)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points; i = next++) run_point(i);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows, bool timing) {
  std::ostringstream os;
  os << "axis,value,scheme,pcrb,apcrb,outer_iters,wall_ms,status\n";
  for (const auto& r : rows) {
    os << r.axis << ',' << format_double(r.value) << ',' << to_string(r.scheme) << ',' << format_double(r.pcrb)
       << ',' << format_double(r.apcrb) << ',' << r.outer_iters << ','
       << (timing ? format_double(r.wall_ms) : std::string("0")) << ',' << r.status << '\n';
  }
  return os.str();
}

}  // namespace netsense
