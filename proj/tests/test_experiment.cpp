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


#include <gtest/gtest.h>

#include <sstream>

#include "netsense/experiment.hpp"
#include "netsense/io.hpp"

using namespace netsense;

namespace {

RunOptions quick() {
  RunOptions o;
  o.optimizer.max_outer = 3;
  o.optimizer.max_inner = 10;
  return o;
}

Scenario data_limited() {
  Scenario sc = default_scenario();
  sc.rcs_m2 = 1e6;
  sc.mc_samples = 8;
  refresh_attenuation(sc);
  return sc;
}

TEST(Schemes, NamesRoundTrip) {
  EXPECT_EQ(all_schemes().size(), 9u);
  for (Scheme s : all_schemes()) EXPECT_EQ(scheme_from_string(to_string(s)), s);
  EXPECT_THROW(scheme_from_string("alg4"), ConfigError);
  EXPECT_TRUE(is_ebc_scheme(Scheme::bench6));
  EXPECT_FALSE(is_ebc_scheme(Scheme::bench3));
}

TEST(Schemes, FullModelOrdering) {
  const Scenario sc = data_limited();
  const SampleSet set = draw_samples(sc);
  const RunOptions o = quick();
  const ResultRow a3 = run_scheme(Scheme::alg3, sc, set, o);
  const ResultRow b1 = run_scheme(Scheme::bench1, sc, set, o);
  const ResultRow b2 = run_scheme(Scheme::bench2, sc, set, o);
  const ResultRow b3 = run_scheme(Scheme::bench3, sc, set, o);
  for (const auto* r : {&a3, &b1, &b2, &b3}) {
    EXPECT_TRUE(std::isfinite(r->pcrb)) << r->status;
    EXPECT_NEAR(r->apcrb, r->pcrb / 2.0, 1e-15);
    EXPECT_EQ(r->status.rfind("error", 0), std::string::npos) << r->status;
  }
  EXPECT_LE(b3.pcrb, a3.pcrb * (1 + 1e-6));
  EXPECT_LE(a3.pcrb, std::min(b1.pcrb, b2.pcrb) * (1 + 1e-6));
}

TEST(Schemes, EbcNeedsLargerArray) {
  const Scenario sc = data_limited();  // Mr = 4 = 2K
  const ResultRow r = run_scheme(Scheme::ebc, sc, draw_samples(sc), quick());
  EXPECT_TRUE(std::isnan(r.pcrb));
  EXPECT_EQ(r.status.rfind("error", 0), 0u);
  EXPECT_EQ(r.status.find(','), std::string::npos);
}

TEST(Axis, Application) {
  Scenario sc = default_scenario();
  EXPECT_TRUE(is_valid_axis("Mr"));
  EXPECT_FALSE(is_valid_axis("color"));
  apply_axis(sc, "power_dbm", 37.0);
  EXPECT_NEAR(sc.power_budget[1], dbm_to_watt(37.0), 1e-12);
  apply_axis(sc, "fronthaul_bits", 16.0);
  EXPECT_EQ(sc.fronthaul_cap[0], 16.0);
  apply_axis(sc, "num_targets", 3.0);
  EXPECT_EQ(sc.num_targets(), 3);
  EXPECT_EQ(sc.attenuation.num_targets(), 3);
  apply_axis(sc, "num_bs", 4.0);
  EXPECT_EQ(sc.num_bs(), 4);
  EXPECT_EQ(sc.fronthaul_cap[3], 16.0);
  apply_axis(sc, "Mr", 12.0);
  EXPECT_EQ(sc.mr, 12);
  EXPECT_THROW(apply_axis(sc, "Mr", 2.5), ConfigError);
  EXPECT_THROW(apply_axis(sc, "fronthaul_bits", 0.0), ConfigError);
  EXPECT_THROW(apply_axis(sc, "num_bs", 99.0), ConfigError);
  apply_full_scale(sc);
  EXPECT_EQ(sc.mt, 8);
  EXPECT_EQ(sc.mr, 16);
}

TEST(SweepSpec, ParsingAndValidation) {
  const SweepSpec s = parse_sweep_spec(
      R"({"axis": "power_dbm", "values": [25, 31], "schemes": ["alg3", "bench3"], "scenario": "x.json"})", "/tmp/cfg");
  EXPECT_EQ(s.values.size(), 2u);
  EXPECT_EQ(s.schemes[1], Scheme::bench3);
  EXPECT_EQ(s.scenario_path, "/tmp/cfg/x.json");
  EXPECT_THROW(parse_sweep_spec(R"({"axis": "nope", "values": [1], "schemes": ["alg3"]})"), ConfigError);
  EXPECT_THROW(parse_sweep_spec(R"({"axis": "Mr", "values": [], "schemes": ["alg3"]})"), ConfigError);
  for (const char* name : {"sweep_power.json", "sweep_fronthaul.json", "sweep_mr_ebc.json"}) {
    EXPECT_NO_THROW(load_sweep_spec(std::string(NETSENSE_CONFIG_DIR) + "/" + name)) << name;
  }
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
  SweepSpec spec;
  spec.axis = "power_dbm";
  spec.values = {25.0, 31.0, 37.0};
  spec.schemes = {Scheme::bench2, Scheme::bench3};
  Scenario base = data_limited();
  base.mc_samples = 4;
  refresh_attenuation(base);
  spec.threads = 1;
  const auto a = sweep(spec, base, quick());
  spec.threads = 3;
  const auto b = sweep(spec, base, quick());
  ASSERT_EQ(a.size(), 6u);
  EXPECT_EQ(rows_to_csv(a, false), rows_to_csv(b, false));
  EXPECT_EQ(a[2].value, 31.0);
  EXPECT_EQ(a[2].scheme, Scheme::bench2);
  // Bench III is monotone in the power budget.
  EXPECT_LE(a[3].pcrb, a[1].pcrb * (1 + 1e-6));
  EXPECT_LE(a[5].pcrb, a[3].pcrb * (1 + 1e-6));
}

TEST(Sweep, BadPointBecomesErrorRows) {
  SweepSpec spec;
  spec.axis = "Mr";
  spec.values = {2.0, 6.0};
  spec.schemes = {Scheme::ebc};
  Scenario base = data_limited();
  base.mc_samples = 4;
  refresh_attenuation(base);
  const auto rows = sweep(spec, base, quick());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_TRUE(std::isnan(rows[0].pcrb));
  EXPECT_TRUE(std::isfinite(rows[1].pcrb)) << rows[1].status;
}

TEST(Csv, LayoutAndTimingSwitch) {
  ResultRow r;
  r.axis = "Mr";
  r.value = 8;
  r.scheme = Scheme::bench5;
  r.pcrb = 0.5;
  r.apcrb = 0.25;
  r.outer_iters = 3;
  r.wall_ms = 12.5;
  r.status = "ok";
  std::istringstream in(rows_to_csv({r}, true));
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, "axis,value,scheme,pcrb,apcrb,outer_iters,wall_ms,status");
  EXPECT_EQ(line, "Mr,8,bench5,0.5,0.25,3,12.5,ok");
  EXPECT_NE(rows_to_csv({r}, false).find(",3,0,ok"), std::string::npos);
}

}  // namespace
