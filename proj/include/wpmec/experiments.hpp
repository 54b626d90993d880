// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/ao.hpp"
#include "wpmec/channel.hpp"
#include "wpmec/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpmec {

/// Scenario-file violations carry the offending field path.
struct SchemaError : std::runtime_error {
  std::string field;
  SchemaError(const std::string& f, const std::string& what)
      : std::runtime_error("scenario field '" + f + "': " + what), field(f) {}
};

enum class SchemeKind {
  Solver,        // full design, AO solver as configured
  FixedWptTime,  // tau0 pinned (default T/2), everything else optimized
  FixedPhase,    // all-zero IRS phases, full resource optimization
  NoIrs,         // N = 0
  OffloadOnly,   // f_k = 0
  LocalOnly,     // e_k = tau_{1,k} = 0, WPT beam still optimized
};

const char* to_string(SchemeKind k);
SchemeKind scheme_kind_from_string(const std::string& s);

struct SchemeSpec {
  SchemeKind kind = SchemeKind::Solver;
  DibfCase dibf = DibfCase::Case2;
  MaScheme ma = MaScheme::Tdma;

  std::string label() const;  // e.g. "solver_case2_tdma"
};

struct PlacementSpec {
  Vec3 center{10, 0, 0};
  double radius_m = 1.5;  // devices drawn uniformly in this disc, z = center.z
};

/// One experiment definition: a sweep axis, Monte-Carlo realizations over
/// device placement and fading, and a list of schemes to run on each draw.
struct Scenario {
  int schema_version = 1;
  SystemParams params;          // device_positions ignored; redrawn per draw
  std::string sweep_axis;       // "N", "PE_dbm", or "C"
  std::vector<double> sweep_values;
  int mc_realizations = 50;
  std::vector<SchemeSpec> schemes;
  std::uint64_t seed_base = 1;
  AoConfig ao;
  PlacementSpec placement;
  std::vector<double> qos_min_bits;  // empty = no QoS constraints
  double fixed_wpt_tau0_frac = 0.5;  // fixed_wpt_time pins tau0 = frac * T
  int num_threads = 0;               // 0 = hardware concurrency
};

/// Parses a scenario document; throws SchemaError naming the bad field.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);
std::string default_scenario_json();

/// One solve request (CLI `solve`/`compare-ma` input document). Device
/// positions may be given explicitly in params.device_positions; otherwise
/// they are drawn from the placement disc using `seed`.
struct InstanceSpec {
  SystemParams params;
  std::uint64_t seed = 1;  // channel realization seed
  DibfCase dibf = DibfCase::Case2;
  MaScheme ma = MaScheme::Tdma;
  AoConfig ao;
  std::vector<double> qos_min_bits;
};

InstanceSpec parse_instance(const std::string& json_text);
InstanceSpec load_instance(const std::string& path);

struct RunRecord {
  std::string scheme;
  double sweep_value = 0;
  int realization = 0;
  double objective_bits = 0;
  double tau0 = 0;
  std::vector<double> harvested_j;  // per device
  int iterations = 0;
  double wall_time_s = 0;
};

struct ScenarioResult {
  std::vector<RunRecord> runs;  // sorted by (scheme, sweep_value, realization)
  std::string runs_csv;         // wall_time_s is the last column
  std::string summary_csv;      // per (scheme, sweep_value) averages
  std::string metadata_json;    // scenario echo (pinned benchmark values etc.)
};

/// Device positions for one realization: uniform in the placement disc,
/// bit-reproducible across platforms.
std::vector<Vec3> draw_positions(const PlacementSpec& placement, int K,
                                 std::uint64_t seed);

/// Applies one sweep value to a parameter set.
SystemParams apply_sweep(const SystemParams& base, const std::string& axis,
                         double value);

/// Solves one scheme on one draw. `fixed_wpt_tau0_frac` only affects
/// SchemeKind::FixedWptTime. Throws std::invalid_argument on a bad scheme.
Solution benchmark_schemes(const SystemParams& params, const ChannelRealization& chan,
                           const SchemeSpec& which, const AoConfig& ao,
                           double fixed_wpt_tau0_frac = 0.5);

/// Per-device harvested energy of a solved scheme (regenerates the N=0
/// channel for the no-IRS benchmark).
std::vector<double> harvested_per_device(const SystemParams& params,
                                         const ChannelRealization& chan,
                                         const SchemeSpec& which,
                                         const Solution& sol);

/// Runs the full sweep: realizations dispatched to a worker pool, rows
/// gathered and sorted deterministically. Identical scenario + seed_base
/// gives byte-identical CSVs except the wall_time_s column.
ScenarioResult run_scenario(const Scenario& scenario);

/// Writes runs.csv, summary.csv, and metadata.json under out_dir.
void write_scenario_csvs(const ScenarioResult& result, const std::string& out_dir);

} // namespace wpmec
