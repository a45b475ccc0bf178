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

#include "netsense/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace netsense::io {

namespace {

using json = nlohmann::json;

double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario key '") + key + "': " + e.what());
  }
}

Vec2 vec2(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(what + " must be a 2-element numeric array");
  }
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

double capacity(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ConfigError("fronthaul_bits: unknown value '" + s + "'");
  }
  if (!j.is_number()) throw ConfigError("fronthaul_bits entries must be numbers, null or \"inf\"");
  return j.get<double>();
}

/// Per-BS list from an array or a scalar broadcast.
std::vector<double> per_bs(const json& j, int n, const char* key, double (*conv)(const json&)) {
  std::vector<double> out;
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != n) throw ConfigError(std::string(key) + " needs one entry per BS");
    for (const auto& e : j) out.push_back(conv(e));
  } else {
    out.assign(n, conv(j));
  }
  return out;
}

double number(const json& j) {
  if (!j.is_number()) throw ConfigError("expected a number");
  return j.get<double>();
}

json matrix_json(const CMat& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array();
    json ri = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return json{{"re", re}, {"im", im}};
}

CMat matrix_from(const json& j) {
  if (!j.contains("re") || !j.contains("im")) throw ConfigError("matrix needs 're' and 'im'");
  const json& re = j.at("re");
  const json& im = j.at("im");
  if (!re.is_array() || re.size() != im.size() || re.empty()) throw ConfigError("matrix rows do not match");
  const Eigen::Index rows = static_cast<Eigen::Index>(re.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(re[0].size());
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (re[i].size() != static_cast<std::size_t>(cols) || im[i].size() != static_cast<std::size_t>(cols)) {
      throw ConfigError("matrix is ragged");
    }
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = cd(re[i][j2].get<double>(), im[i][j2].get<double>());
  }
  return m;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  Scenario sc;
  if (!j.contains("bs_positions") || !j.at("bs_positions").is_array()) throw ConfigError("bs_positions missing");
  for (const auto& p : j.at("bs_positions")) sc.bs_positions.push_back(vec2(p, "bs position"));
  if (!j.contains("targets") || !j.at("targets").is_array()) throw ConfigError("targets missing");
  for (const auto& t : j.at("targets")) {
    if (!t.contains("center") || !t.contains("radius")) throw ConfigError("target needs center and radius");
    GaussianPrior g;
    g.center = vec2(t.at("center"), "target center");
    g.radius = number(t.at("radius"));
    sc.targets.push_back(g);
  }
  const int n = sc.num_bs();
  sc.mt = get_or<int>(j, "Mt", 4);
  sc.mr = get_or<int>(j, "Mr", 4);
  sc.wavelength_m = get_or<double>(j, "wavelength_m", 0.1);
  sc.noise_power = noise_power_from_psd(get_or<double>(j, "noise_psd_dbm_hz", -169.0),
                                        get_or<double>(j, "bandwidth_hz", 1e6));
  sc.rcs_m2 = get_or<double>(j, "rcs_m2", 1.0);
  sc.mc_samples = get_or<int>(j, "mc_samples", 20);
  sc.rng_seed = get_or<std::uint64_t>(j, "seed", 2024);
  if (!j.contains("power_dbm")) throw ConfigError("power_dbm missing");
  for (double dbm : per_bs(j.at("power_dbm"), n, "power_dbm", number)) sc.power_budget.push_back(dbm_to_watt(dbm));
  sc.fronthaul_cap = j.contains("fronthaul_bits") ? per_bs(j.at("fronthaul_bits"), n, "fronthaul_bits", capacity)
                                                  : std::vector<double>(n, std::numeric_limits<double>::infinity());
  sc.validate();
  refresh_attenuation(sc);
  return sc;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["bs_positions"] = json::array();
  for (const auto& p : sc.bs_positions) j["bs_positions"].push_back({p.x(), p.y()});
  j["targets"] = json::array();
  for (const auto& t : sc.targets) j["targets"].push_back({{"center", {t.center.x(), t.center.y()}}, {"radius", t.radius}});
  j["Mt"] = sc.mt;
  j["Mr"] = sc.mr;
  j["wavelength_m"] = sc.wavelength_m;
  // Noise is stored as a total power; write it back as a 1 Hz density.
  j["noise_psd_dbm_hz"] = watt_to_dbm(sc.noise_power);
  j["bandwidth_hz"] = 1.0;
  j["power_dbm"] = json::array();
  for (double w : sc.power_budget) j["power_dbm"].push_back(watt_to_dbm(w));
  j["fronthaul_bits"] = json::array();
  for (double d : sc.fronthaul_cap) {
    if (std::isfinite(d)) {
      j["fronthaul_bits"].push_back(d);
    } else {
      j["fronthaul_bits"].push_back("inf");
    }
  }
  j["mc_samples"] = sc.mc_samples;
  j["seed"] = sc.rng_seed;
  j["rcs_m2"] = sc.rcs_m2;
  return j.dump(2) + "\n";
}

std::string design_point_to_json(const DesignPoint& p) {
  json j;
  j["r"] = json::array();
  j["q"] = json::array();
  for (const auto& m : p.r) j["r"].push_back(matrix_json(m));
  for (const auto& m : p.q) j["q"].push_back(matrix_json(m));
  if (std::isfinite(p.objective)) j["pcrb"] = p.objective;
  return j.dump(2) + "\n";
}

DesignPoint parse_design_point(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("design point is not valid JSON: ") + e.what());
  }
  if (!j.contains("r") || !j.contains("q")) throw ConfigError("design point needs 'r' and 'q'");
  DesignPoint p;
  for (const auto& m : j.at("r")) p.r.push_back(matrix_from(m));
  for (const auto& m : j.at("q")) p.q.push_back(matrix_from(m));
  if (p.r.size() != p.q.size()) throw ConfigError("design point needs one R and one Q per BS");
  if (j.contains("pcrb") && j.at("pcrb").is_number()) p.objective = j.at("pcrb").get<double>();
  return p;
}

DesignPoint load_design_point(const std::string& path) { return parse_design_point(read_file(path)); }

void save_design_point(const std::string& path, const DesignPoint& p) { write_file(path, design_point_to_json(p)); }

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << content;
  if (!f) throw IoError("write failed: " + path);
}

}  // namespace netsense::io
