// SPDX-License-Identifier: Apache-2.0
// Command-line front end: solve single instances, run scenario sweeps,
// compare multiple-access schemes, map single-user activation thresholds,
// and cross-check the AO solver against the brute-force oracle.
//
// Exit codes: 0 success, 2 schema/input error, 3 solver-contract violation.

#include "wpmec/ao.hpp"
#include "wpmec/experiments.hpp"
#include "wpmec/model.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/single_user.hpp"
#include "wpmec/units.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

namespace {

using nlohmann::json;
using namespace wpmec;

constexpr int kExitSchema = 2;
constexpr int kExitContract = 3;

json alloc_to_json(const ResourceAllocation& a) {
  json j;
  j["tau0_s"] = a.tau0;
  j["tau1_s"] = a.tau1;
  j["energy_j"] = a.energy;
  j["power_w"] = a.power;
  j["freq_hz"] = a.freq;
  return j;
}

json beam_to_json(const BeamVector& v) {
  json arr = json::array();
  for (Eigen::Index n = 0; n < v.entries.size(); ++n)
    arr.push_back({v.entries[n].real(), v.entries[n].imag()});
  return arr;
}

json solution_to_json(const Solution& s) {
  json j;
  j["objective_bits"] = s.objective_bits;
  j["case"] = static_cast<int>(s.dibf);
  j["ma"] = s.ma == MaScheme::Tdma ? "tdma" : "noma";
  j["alloc"] = alloc_to_json(s.alloc);
  j["beams"]["v0"] = beam_to_json(s.beams.v0);
  json v1 = json::array();
  for (const auto& v : s.beams.v1) v1.push_back(beam_to_json(v));
  j["beams"]["v1"] = v1;
  j["offload_active"] = s.offload_active;
  j["iterations"] = s.iterations;
  j["trace"] = s.trace;
  return j;
}

bool trace_monotone(const std::vector<double>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] < trace[i - 1] - 1e-9 * std::max(1.0, std::abs(trace[i - 1])))
      return false;
  return true;
}

void emit(const json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out_path);
  f << text;
}

// FNV-1a over the canonically formatted channel entries.
std::string instance_hash(const ChannelRealization& chan) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    for (int i = 0; i < n; ++i) h = (h ^ static_cast<unsigned char>(buf[i])) *
                                    0x100000001b3ull;
  };
  for (const auto& c : chan.h_direct) { feed(c.real()); feed(c.imag()); }
  for (Eigen::Index n = 0; n < chan.g_hap_irs.size(); ++n) {
    feed(chan.g_hap_irs[n].real());
    feed(chan.g_hap_irs[n].imag());
  }
  for (const auto& v : chan.h_irs_device)
    for (Eigen::Index n = 0; n < v.size(); ++n) { feed(v[n].real()); feed(v[n].imag()); }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int cmd_solve(const std::string& in_path, const std::string& out_path) {
  InstanceSpec spec = load_instance(in_path);
  AoConfig cfg = spec.ao;
  if (!spec.qos_min_bits.empty()) cfg.qos_min_bits = spec.qos_min_bits;
  const ChannelRealization chan = generate_channels(spec.params, spec.seed);
  const Solution sol = solve_instance(spec.params, chan, spec.dibf, spec.ma, cfg);

  const FeasibilityReport rep = check_feasibility(
      spec.params, chan, sol.beams, sol.alloc, sol.dibf, sol.ma,
      spec.qos_min_bits.empty() ? std::optional<std::vector<double>>{}
                                : std::optional<std::vector<double>>{spec.qos_min_bits});

  json j = solution_to_json(sol);
  j["schema_version"] = 1;
  j["seed"] = spec.seed;
  j["feasible"] = rep.feasible;
  j["worst_violation"] = rep.worst_violation;
  emit(j, out_path);
  if (!rep.feasible || !trace_monotone(sol.trace)) return kExitContract;
  return 0;
}

int cmd_sweep(const std::string& scenario_path, const std::string& out_dir) {
  const Scenario sc = load_scenario(scenario_path);
  const ScenarioResult result = run_scenario(sc);
  write_scenario_csvs(result, out_dir);
  std::cout << "wrote " << out_dir << "/runs.csv, summary.csv, metadata.json ("
            << result.runs.size() << " rows)\n";
  return 0;
}

int cmd_compare_ma(const std::string& in_path, const std::string& out_path,
                   double eq_tol, double ineq_slack) {
  InstanceSpec spec = load_instance(in_path);
  const ChannelRealization chan = generate_channels(spec.params, spec.seed);
  const ChainReport rep =
      verify_chain(spec.params, chan, spec.ao, eq_tol, ineq_slack);
  json j;
  j["schema_version"] = 1;
  j["tdma"] = {{"case1", rep.tdma_c1}, {"case2", rep.tdma_c2}, {"case3", rep.tdma_c3}};
  j["noma"] = {{"case1", rep.noma_c1}, {"case2", rep.noma_c2}, {"case3", rep.noma_c3}};
  j["worst_equality_gap"] = rep.worst_equality_gap;
  j["worst_inequality_slack"] = rep.worst_inequality_slack;
  j["ok"] = rep.ok;
  emit(j, out_path);
  return rep.ok ? 0 : kExitContract;
}

// Pure-LoS activation map over an (N, P_E) grid at fixed C: one row per grid
// point with the aligned-beam equivalent gain and activation threshold.
int cmd_activation_map(int n_max, double pe_min_dbm, double pe_max_dbm,
                       int pe_points, double cycles, const std::string& out_path) {
  if (n_max < 0 || pe_points < 1 || (pe_points > 1 && pe_min_dbm >= pe_max_dbm)) {
    std::cerr << "activation-map: need n-max >= 0, pe-points >= 1, "
                 "pe-min-dbm < pe-max-dbm\n";
    return kExitSchema;
  }
  SystemParams base;
  base.num_devices = 1;
  base.cycles_per_bit = cycles;
  base.device_positions = {Vec3{10, 0, 0}};
  std::ostringstream csv;
  csv << "N,P_E_dbm,C,h,threshold_dbm,activated,tau1_s\n";
  for (int n = 0; n <= n_max; ++n) {
    SystemParams p = base;
    p.num_elements = n;
    const double h = los_gain(p, n);
    for (int i = 0; i < pe_points; ++i) {
      const double pe_dbm =
          pe_points == 1 ? pe_min_dbm
                         : pe_min_dbm + (pe_max_dbm - pe_min_dbm) * i / (pe_points - 1);
      p.hap_tx_power_w = dbm_to_watt(pe_dbm);
      const ActivationAnalysis a = analyze_single_user(p, h);
      char line[256];
      std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", n,
                    pe_dbm, cycles, a.gain_h, watt_to_dbm(a.threshold_w),
                    a.activated ? 1 : 0, a.tau1_opt);
      csv << line;
    }
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out_path);
    f << csv.str();
  }
  return 0;
}

int cmd_oracle_check(std::uint64_t seed, int devices, int elements, int dibf_i,
                     const std::string& ma_s, int levels,
                     const std::string& out_path) {
  if (devices < 1 || devices > 2 || elements < 0 || elements > 3) {
    std::cerr << "oracle-check: brute force supports K in {1,2}, N in {0..3}\n";
    return kExitSchema;
  }
  SystemParams p;
  p.num_devices = devices;
  p.num_elements = elements;
  p.device_positions =
      draw_positions(PlacementSpec{}, devices, seed ^ 0x706f73ull);
  const MaScheme ma = ma_s == "noma" ? MaScheme::Noma : MaScheme::Tdma;
  const DibfCase dibf = static_cast<DibfCase>(dibf_i);
  const ChannelRealization chan = generate_channels(p, seed);

  const Solution sol = solve_instance(p, chan, dibf, ma, {});
  OracleConfig oc;
  oc.phase_levels = levels;
  const OracleValue oracle = brute_force_rate(p, chan, dibf, ma, oc);

  json j;
  j["schema_version"] = 1;
  j["instance_hash"] = instance_hash(chan);
  j["case"] = dibf_i;
  j["ma"] = ma == MaScheme::Noma ? "noma" : "tdma";
  j["phase_levels"] = levels;
  j["oracle_bits"] = oracle.bits;
  j["oracle_slack"] = oracle.slack;
  j["solver_bits"] = sol.objective_bits;
  j["gap_bits"] = sol.objective_bits - oracle.bits;
  const bool ok = sol.objective_bits >= oracle.bits - oracle.slack;
  j["ok"] = ok;
  emit(j, out_path);
  return ok ? 0 : kExitContract;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-aided wireless-powered MEC: computation-rate optimization"};
  app.require_subcommand(1);

  std::string in_path, out_path, scenario_path, out_dir = "out";
  double eq_tol = 1e-6, ineq_slack = 1e-6;
  int n_max = 32, pe_points = 13;
  double pe_min_dbm = 20, pe_max_dbm = 50, cycles = 800;
  std::uint64_t seed = 1;
  int devices = 2, elements = 2, dibf_i = 2, levels = 16;
  std::string ma_s = "tdma";

  auto* solve = app.add_subcommand("solve", "solve one instance (JSON in/out)");
  solve->add_option("-i,--input", in_path, "instance JSON")->required();
  solve->add_option("-o,--output", out_path, "output JSON path (default stdout)");

  auto* sweep = app.add_subcommand("sweep", "run a scenario file, emit CSVs");
  sweep->add_option("-s,--scenario", scenario_path, "scenario JSON")->required();
  sweep->add_option("-o,--out-dir", out_dir, "output directory");

  auto* cmp = app.add_subcommand("compare-ma", "TDMA/NOMA chain check");
  cmp->add_option("-i,--input", in_path, "instance JSON")->required();
  cmp->add_option("-o,--output", out_path, "output JSON path (default stdout)");
  cmp->add_option("--eq-tol", eq_tol, "equality tolerance");
  cmp->add_option("--ineq-slack", ineq_slack, "inequality slack");

  auto* act = app.add_subcommand("activation-map", "single-user thresholds");
  act->add_option("--n-max", n_max, "IRS element count grid 0..n-max");
  act->add_option("--pe-min-dbm", pe_min_dbm, "HAP power grid start");
  act->add_option("--pe-max-dbm", pe_max_dbm, "HAP power grid end");
  act->add_option("--pe-points", pe_points, "HAP power grid points");
  act->add_option("--cycles-per-bit", cycles, "CPU cycles per bit (C)");
  act->add_option("-o,--output", out_path, "output CSV path (default stdout)");

  auto* orc = app.add_subcommand("oracle-check", "solver vs brute force");
  orc->add_option("--seed", seed, "channel seed");
  orc->add_option("--devices", devices, "K (1 or 2)");
  orc->add_option("--elements", elements, "N (0..3)");
  orc->add_option("--case", dibf_i, "DIBF case (1..3)")->check(CLI::Range(1, 3));
  orc->add_option("--ma", ma_s, "tdma or noma")
      ->check(CLI::IsMember({"tdma", "noma"}));
  orc->add_option("--levels", levels, "phase quantization levels");
  orc->add_option("-o,--output", out_path, "output JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(in_path, out_path);
    if (sweep->parsed()) return cmd_sweep(scenario_path, out_dir);
    if (cmp->parsed()) return cmd_compare_ma(in_path, out_path, eq_tol, ineq_slack);
    if (act->parsed())
      return cmd_activation_map(n_max, pe_min_dbm, pe_max_dbm, pe_points, cycles,
                                out_path);
    if (orc->parsed())
      return cmd_oracle_check(seed, devices, elements, dibf_i, ma_s, levels,
                              out_path);
  } catch (const wpmec::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
