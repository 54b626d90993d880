// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wpmec/channel.hpp"
#include "wpmec/experiments.hpp"
#include "wpmec/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

using namespace wpmec;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Drops the trailing wall-time column from every runs.csv line.
std::string strip_last_column(const std::string& csv) {
  std::ostringstream out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << (pos == std::string::npos ? line : line.substr(0, pos)) << '\n';
  }
  return out.str();
}

Scenario tiny_scenario() {
  Scenario sc;
  sc.params.num_devices = 2;
  sc.params.num_elements = 2;
  sc.sweep_axis = "N";
  sc.sweep_values = {2};
  sc.mc_realizations = 2;
  sc.seed_base = 5;
  sc.ao.restarts = 0;
  sc.num_threads = 1;
  sc.schemes = {
      {SchemeKind::Solver, DibfCase::Case2, MaScheme::Tdma},
      {SchemeKind::FixedWptTime, DibfCase::Case2, MaScheme::Tdma},
      {SchemeKind::FixedPhase, DibfCase::Case2, MaScheme::Tdma},
      {SchemeKind::NoIrs, DibfCase::Case2, MaScheme::Tdma},
      {SchemeKind::OffloadOnly, DibfCase::Case2, MaScheme::Tdma},
      {SchemeKind::LocalOnly, DibfCase::Case2, MaScheme::Tdma},
  };
  return sc;
}

} // namespace

TEST_CASE("the built-in default scenario parses and matches the shipped file") {
  const std::string builtin = default_scenario_json();
  const Scenario sc = parse_scenario(builtin);
  CHECK(sc.schema_version == 1);
  CHECK(sc.sweep_axis == "N");
  CHECK(sc.mc_realizations == 50);
  CHECK(sc.schemes.size() == 7);
  CHECK(sc.params.num_devices == 5);
  CHECK(sc.params.hap_tx_power_w == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(sc.params.noise_power_w == doctest::Approx(3.1622776601683794e-11));
  // Both solver schemes survive parsing with distinct cases.
  CHECK(sc.schemes[0].label() == "solver_case2_tdma");
  CHECK(sc.schemes[1].label() == "solver_case3_tdma");

  const std::string shipped =
      read_file(std::string(WPMEC_SOURCE_DIR) + "/scenarios/default.json");
  CHECK(shipped == builtin);
}

TEST_CASE("schema violations name the offending field") {
  const auto field_of = [](const std::string& text) {
    try {
      parse_scenario(text);
    } catch (const SchemaError& e) {
      return e.field;
    }
    return std::string("<no error>");
  };
  CHECK(field_of("not json") == "<root>");
  CHECK(field_of(R"({"schema_version": 2})") == "schema_version");
  CHECK(field_of(R"({"schema_version": 1})") == "sweep");
  CHECK(field_of(R"({"schema_version": 1,
                     "sweep": {"axis": "Q", "values": [1]}})") == "sweep.axis");
  CHECK(field_of(R"({"schema_version": 1,
                     "sweep": {"axis": "N", "values": []}})") == "sweep.values");
  CHECK(field_of(R"({"schema_version": 1,
                     "sweep": {"axis": "N", "values": [2]},
                     "schemes": [{"scheme": "bogus"}]})") == "schemes[0].scheme");
  CHECK(field_of(R"({"schema_version": 1,
                     "sweep": {"axis": "N", "values": [2]},
                     "schemes": [{"scheme": "solver", "case": 5}]})") ==
        "schemes[0].case");
  CHECK(field_of(R"({"schema_version": 1,
                     "sweep": {"axis": "N", "values": [2]},
                     "schemes": [{"scheme": "solver"}],
                     "params": {"num_devices": 2},
                     "qos_min_bits": [1.0]})") == "qos_min_bits");
  CHECK(field_of(R"({"schema_version": 1,
                     "sweep": {"axis": "N", "values": [2]},
                     "schemes": [{"scheme": "solver"}],
                     "fixed_wpt_tau0_frac": 1.5})") == "fixed_wpt_tau0_frac");
  CHECK_THROWS_AS(scheme_kind_from_string("nonsense"), std::invalid_argument);
}

TEST_CASE("sweep application touches exactly one knob") {
  SystemParams base;
  base.num_elements = 4;
  const SystemParams n = apply_sweep(base, "N", 16);
  CHECK(n.num_elements == 16);
  CHECK(n.hap_tx_power_w == base.hap_tx_power_w);
  const SystemParams pe = apply_sweep(base, "PE_dbm", 36.0);
  CHECK(pe.hap_tx_power_w == doctest::Approx(3.9810717055349722).epsilon(1e-12));
  CHECK(pe.num_elements == 4);
  const SystemParams c = apply_sweep(base, "C", 1500.0);
  CHECK(c.cycles_per_bit == 1500.0);
}

TEST_CASE("device placement is reproducible and inside the disc") {
  PlacementSpec pl;
  const auto a = draw_positions(pl, 6, 77);
  const auto b = draw_positions(pl, 6, 77);
  const auto c = draw_positions(pl, 6, 78);
  REQUIRE(a.size() == 6);
  bool same = true, diff = false;
  for (int k = 0; k < 6; ++k) {
    same = same && a[k].x == b[k].x && a[k].y == b[k].y && a[k].z == b[k].z;
    diff = diff || a[k].x != c[k].x;
    const double dx = a[k].x - pl.center.x, dy = a[k].y - pl.center.y;
    CHECK(std::hypot(dx, dy) <= pl.radius_m + 1e-12);
    CHECK(a[k].z == pl.center.z);
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("benchmark schemes obey their defining restrictions") {
  SystemParams p;
  p.num_devices = 2;
  p.num_elements = 2;
  p.device_positions = draw_positions(PlacementSpec{}, 2, 9);
  const auto chan = generate_channels(p, 9);
  AoConfig ao;
  ao.restarts = 0;

  const Solution full = benchmark_schemes(
      p, chan, {SchemeKind::Solver, DibfCase::Case2, MaScheme::Tdma}, ao);
  const Solution fixw = benchmark_schemes(
      p, chan, {SchemeKind::FixedWptTime, DibfCase::Case2, MaScheme::Tdma}, ao, 0.5);
  const Solution fixp = benchmark_schemes(
      p, chan, {SchemeKind::FixedPhase, DibfCase::Case2, MaScheme::Tdma}, ao);
  const Solution noirs = benchmark_schemes(
      p, chan, {SchemeKind::NoIrs, DibfCase::Case2, MaScheme::Tdma}, ao);
  const Solution offo = benchmark_schemes(
      p, chan, {SchemeKind::OffloadOnly, DibfCase::Case2, MaScheme::Tdma}, ao);
  const Solution loco = benchmark_schemes(
      p, chan, {SchemeKind::LocalOnly, DibfCase::Case2, MaScheme::Tdma}, ao);

  CHECK(fixw.alloc.tau0 == doctest::Approx(0.5 * p.frame_s).epsilon(1e-9));
  for (double f : offo.alloc.freq) CHECK(f == doctest::Approx(0.0));
  for (double e : loco.alloc.energy) CHECK(e == doctest::Approx(0.0));

  const double tol = 1e-9;
  CHECK(full.objective_bits >= fixw.objective_bits * (1 - tol));
  CHECK(full.objective_bits >= fixp.objective_bits * (1 - tol));
  CHECK(full.objective_bits >= noirs.objective_bits * (1 - tol));
  CHECK(full.objective_bits >= offo.objective_bits * (1 - tol));
  CHECK(full.objective_bits >= loco.objective_bits * (1 - tol));

  // The no-IRS benchmark is the solver on the same seed with N = 0.
  SystemParams p0 = p;
  p0.num_elements = 0;
  const auto chan0 = generate_channels(p0, chan.seed);
  const Solution ref0 = benchmark_schemes(
      p0, chan0, {SchemeKind::Solver, DibfCase::Case2, MaScheme::Tdma}, ao);
  CHECK(noirs.objective_bits == doctest::Approx(ref0.objective_bits).epsilon(1e-12));

  // Local-only computes exactly T f / C bits per device.
  double bits = 0;
  for (double f : loco.alloc.freq) bits += p.frame_s * f / p.cycles_per_bit;
  CHECK(loco.objective_bits == doctest::Approx(bits).epsilon(1e-9));
}

TEST_CASE("scenario runs are byte-deterministic and thread-count invariant") {
  Scenario sc = tiny_scenario();
  const ScenarioResult a = run_scenario(sc);
  const ScenarioResult b = run_scenario(sc);
  Scenario sc2 = tiny_scenario();
  sc2.num_threads = 2;
  const ScenarioResult c = run_scenario(sc2);
  CHECK(strip_last_column(a.runs_csv) == strip_last_column(b.runs_csv));
  CHECK(strip_last_column(a.runs_csv) == strip_last_column(c.runs_csv));
  CHECK(a.summary_csv == b.summary_csv);
  CHECK(a.summary_csv == c.summary_csv);
  CHECK(a.metadata_json == c.metadata_json);

  // Rows are sorted by (scheme, sweep value, realization) and complete.
  REQUIRE(a.runs.size() == sc.schemes.size() * sc.mc_realizations);
  for (std::size_t i = 1; i < a.runs.size(); ++i) {
    const auto& x = a.runs[i - 1];
    const auto& y = a.runs[i];
    const bool ordered =
        x.scheme < y.scheme ||
        (x.scheme == y.scheme && (x.sweep_value < y.sweep_value ||
                                  (x.sweep_value == y.sweep_value &&
                                   x.realization < y.realization)));
    CHECK(ordered);
  }
  // The full design dominates every benchmark on each realization.
  for (const auto& run : a.runs) {
    if (run.scheme == "solver_case2_tdma") continue;
    for (const auto& ref : a.runs) {
      if (ref.scheme == "solver_case2_tdma" && ref.realization == run.realization)
        CHECK(ref.objective_bits >= run.objective_bits * (1 - 1e-9));
    }
  }
}

TEST_CASE("instance documents parse with explicit or drawn positions") {
  const std::string text = R"({
    "schema_version": 1,
    "params": {"num_devices": 2, "num_elements": 3,
               "device_positions": [[11, 0, 0], [12, 1, 0]]},
    "seed": 7, "case": 3, "ma": "noma",
    "ao": {"restarts": 1}
  })";
  const InstanceSpec spec = parse_instance(text);
  CHECK(spec.params.num_devices == 2);
  CHECK(spec.params.num_elements == 3);
  REQUIRE(spec.params.device_positions.size() == 2);
  CHECK(spec.params.device_positions[1].x == 12.0);
  CHECK(spec.seed == 7);
  CHECK(spec.dibf == DibfCase::Case3);
  CHECK(spec.ma == MaScheme::Noma);
  CHECK(spec.ao.restarts == 1);

  const std::string drawn =
      R"({"schema_version": 1, "params": {"num_devices": 3}, "seed": 9})";
  const InstanceSpec d1 = parse_instance(drawn);
  const InstanceSpec d2 = parse_instance(drawn);
  REQUIRE(d1.params.device_positions.size() == 3);
  CHECK(d1.params.device_positions[0].x == d2.params.device_positions[0].x);
}
