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

#include "netsense/optimizer.hpp"
#include "netsense/scenario.hpp"

namespace netsense::io {

/// Scenario from JSON text with keys bs_positions, targets[{center, radius}],
/// Mt, Mr, wavelength_m, noise_psd_dbm_hz, bandwidth_hz, power_dbm[],
/// fronthaul_bits[] (null or "inf" for no limit), mc_samples, seed, rcs_m2.
/// Scalars given for power_dbm / fronthaul_bits apply to every BS. The
/// attenuation tensor is regenerated from the seed. Throws ConfigError.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

/// Inverse of parse_scenario (powers written back in dBm).
std::string scenario_to_json(const Scenario& scenario);

/// Design point as {"r": [...], "q": [...]}, each matrix {"re": rows, "im": rows}.
std::string design_point_to_json(const DesignPoint& p);
DesignPoint parse_design_point(const std::string& json_text);
DesignPoint load_design_point(const std::string& path);
void save_design_point(const std::string& path, const DesignPoint& p);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace netsense::io
