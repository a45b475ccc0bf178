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

// netsense command-line front end: evaluate, optimize, sweep, verify.

#include <fstream>
#include <iomanip>
#include <iostream>

#include "CLI11.hpp"
#include "netsense/ebc.hpp"
#include "netsense/experiment.hpp"
#include "netsense/fim.hpp"
#include "netsense/io.hpp"
#include "netsense/optimizer.hpp"
#include "netsense/verify.hpp"

using namespace netsense;

namespace {

struct OptFlags {
  double eps_sca = 1e-4;
  double eps_ao = 1e-4;
  int max_inner = 30;
  int max_outer = 20;

  void attach(CLI::App* app) {
    app->add_option("--eps-sca", eps_sca, "Relative stopping threshold of the SCA loops")->capture_default_str();
    app->add_option("--eps-ao", eps_ao, "Relative stopping threshold of the alternation")->capture_default_str();
    app->add_option("--max-inner", max_inner, "SCA iteration cap")->capture_default_str();
    app->add_option("--max-outer", max_outer, "Alternation iteration cap")->capture_default_str();
  }

  OptimizerOptions options() const {
    OptimizerOptions o;
    o.eps_sca = eps_sca;
    o.eps_ao = eps_ao;
    o.max_inner = max_inner;
    o.max_outer = max_outer;
    return o;
  }
};

Scenario load(const std::string& path, bool full) {
  Scenario sc = io::load_scenario(path);
  if (full) apply_full_scale(sc);
  return sc;
}

void print_point(const Scenario& sc, const DesignPoint& p) {
  std::cout << std::setprecision(10) << "pcrb " << p.objective << "\napcrb " << p.objective / sc.num_targets() << "\n";
  for (std::size_t n = 0; n < p.rates.size(); ++n) {
    std::cout << "bs " << n << " rate " << p.rates[n] << " cap " << sc.fronthaul_cap[n] << " power "
              << p.r[n].trace().real() << " / " << sc.power_budget[n] << "\n";
  }
}

void print_report(const Scenario& sc, const OptimizerReport& rep) {
  print_point(sc, rep.final);
  std::cout << "outer_iterations " << rep.outer_iterations << "\nsdp_solves " << rep.sdp_solves << "\nnewton_steps "
            << rep.newton_steps << "\nrejected_steps " << rep.rejected_steps << "\ntermination " << rep.termination
            << "\n";
  for (const auto& f : rep.flags) std::cout << "flag " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netsense: PCRB-driven transmit and fronthaul compression design"};
  app.require_subcommand(1);
  bool full = false;
  app.add_flag("--full", full, "Use the full array sizes (Mt = 8, Mr = 16)");

  // pcrb
  auto* pcrb_cmd = app.add_subcommand("pcrb", "Evaluate the PCRB of a design point");
  std::string pcrb_scenario, pcrb_design;
  pcrb_cmd->add_option("scenario", pcrb_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  pcrb_cmd->add_option("--design", pcrb_design, "Design point JSON (default: uniform start)")
      ->check(CLI::ExistingFile);

  // optimize
  auto* opt_cmd = app.add_subcommand("optimize", "Alternating optimization of R and Q");
  std::string opt_scenario, opt_out, opt_trace;
  OptFlags opt_flags;
  opt_cmd->add_option("scenario", opt_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  opt_cmd->add_option("-o,--out", opt_out, "Write the final design point here");
  opt_cmd->add_option("--trace", opt_trace, "Write the iteration trace CSV here");
  opt_flags.attach(opt_cmd);

  // ebc
  auto* ebc_cmd = app.add_subcommand("ebc", "Estimate, beamform, then compress");
  std::string ebc_scenario, ebc_out, ebc_trace, ebc_plan, ebc_kind = "proposed";
  OptFlags ebc_flags;
  MusicOptions music;
  ebc_cmd->add_option("scenario", ebc_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  ebc_cmd->add_option("--kind", ebc_kind, "Beamformer: proposed, reduced, augmented, dft, identity")
      ->capture_default_str();
  ebc_cmd->add_option("--plan-out", ebc_plan, "Write the beamforming plan here");
  ebc_cmd->add_option("-o,--out", ebc_out, "Write the final reduced design point here");
  ebc_cmd->add_option("--trace", ebc_trace, "Write the iteration trace CSV here");
  ebc_cmd->add_option("--snapshots", music.snapshots, "Probing snapshots for MUSIC")->capture_default_str();
  ebc_cmd->add_option("--snr-db", music.snr_db, "Per-antenna probing SNR")->capture_default_str();
  ebc_flags.attach(ebc_cmd);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  std::string sweep_spec, sweep_out;
  int sweep_threads = -1;
  bool no_timing = false;
  OptFlags sweep_flags;
  sweep_cmd->add_option("spec", sweep_spec, "Sweep spec JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("-o,--output", sweep_out, "Override the spec's output path");
  sweep_cmd->add_option("--threads", sweep_threads, "Worker threads (0: all cores)");
  sweep_cmd->add_flag("--no-timing", no_timing, "Write wall_ms as 0 for byte-identical reruns");
  sweep_flags.attach(sweep_cmd);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run the self-check suites");
  verify::VerifyOptions vopt;
  verify_cmd->add_option("--seed", vopt.seed, "Random seed")->capture_default_str();
  verify_cmd->add_option("--descent-scenarios", vopt.descent_scenarios, "Random scenarios in the descent suite")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pcrb_cmd) {
      const Scenario sc = load(pcrb_scenario, full);
      const SampleSet set = draw_samples(sc);
      const DesignContext ctx = make_context(sc, set);
      DesignPoint p = pcrb_design.empty() ? init_feasible(ctx) : io::load_design_point(pcrb_design);
      if (static_cast<int>(p.r.size()) != sc.num_bs()) throw ConfigError("design point has the wrong number of BSs");
      evaluate(ctx, p);
      print_point(sc, p);
      std::cout << "max_violation " << max_violation(ctx, p) << "\n";
    } else if (*opt_cmd) {
      const Scenario sc = load(opt_scenario, full);
      const SampleSet set = draw_samples(sc);
      const DesignContext ctx = make_context(sc, set);
      const OptimizerReport rep = alternate(ctx, opt_flags.options());
      print_report(sc, rep);
      if (!opt_out.empty()) io::save_design_point(opt_out, rep.final);
      if (!opt_trace.empty()) write_report_csv(opt_trace, rep);
    } else if (*ebc_cmd) {
      const Scenario sc = load(ebc_scenario, full);
      const SampleSet set = draw_samples(sc);
      const auto angles = estimate_aoa(sc, music);
      const EbcPlan plan = make_plan(angles, sc.mr, beamformer_kind_from_string(ebc_kind));
      for (std::size_t n = 0; n < angles.size(); ++n) {
        std::cout << "bs " << n << " angles";
        for (double a : angles[n]) std::cout << ' ' << a;
        std::cout << "\n";
      }
      std::cout << "Lr " << plan.lr() << "\n";
      if (!ebc_plan.empty()) {
        std::ofstream f(ebc_plan);
        if (!f) throw IoError("cannot write " + ebc_plan);
        write_plan(f, plan);
      }
      EbcOptions eo;
      eo.optimizer = ebc_flags.options();
      const OptimizerReport rep = optimize_ebc(sc, set, plan, eo);
      print_report(sc, rep);
      if (!ebc_out.empty()) io::save_design_point(ebc_out, rep.final);
      if (!ebc_trace.empty()) write_report_csv(ebc_trace, rep);
    } else if (*sweep_cmd) {
      SweepSpec spec = load_sweep_spec(sweep_spec);
      if (!sweep_out.empty()) spec.output_path = sweep_out;
      if (sweep_threads >= 0) spec.threads = sweep_threads;
      if (spec.output_path.empty()) throw ConfigError("sweep needs an output path");
      Scenario base = spec.scenario_path.empty() ? default_scenario() : io::load_scenario(spec.scenario_path);
      if (full) apply_full_scale(base);
      RunOptions ro;
      ro.optimizer = sweep_flags.options();
      const auto rows = sweep(spec, base, ro);
      io::write_file(spec.output_path, rows_to_csv(rows, !no_timing));
      std::cout << rows.size() << " rows written to " << spec.output_path << "\n";
    } else if (*verify_cmd) {
      const auto results = verify::run_all(vopt);
      return verify::print_report(results, std::cout) ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
