// SPDX-License-Identifier: Apache-2.0
#include "wpmec/experiments.hpp"

#include "wpmec/model.hpp"
#include "wpmec/resource_alloc.hpp"
#include "wpmec/units.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace wpmec {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- scenario parsing ------------------------------------------------------

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double num_field(const json& obj, const std::string& path, const std::string& key,
                 double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) throw SchemaError(path + key, "expected a number");
  return v->get<double>();
}

int int_field(const json& obj, const std::string& path, const std::string& key,
              int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) throw SchemaError(path + key, "expected an integer");
  return v->get<int>();
}

Vec3 vec3_field(const json& obj, const std::string& path, const std::string& key,
                Vec3 fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_array() || v->size() != 3 || !(*v)[0].is_number() ||
      !(*v)[1].is_number() || !(*v)[2].is_number())
    throw SchemaError(path + key, "expected [x, y, z]");
  return Vec3{(*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>()};
}

SystemParams parse_params(const json& j) {
  SystemParams p;
  const std::string path = "params.";
  p.bandwidth_hz = num_field(j, path, "bandwidth_hz", p.bandwidth_hz);
  p.noise_power_w =
      dbm_to_watt(num_field(j, path, "noise_power_dbm", watt_to_dbm(p.noise_power_w)));
  p.eh_efficiency = num_field(j, path, "eh_efficiency", p.eh_efficiency);
  p.cpu_energy_coeff = num_field(j, path, "cpu_energy_coeff", p.cpu_energy_coeff);
  p.cycles_per_bit = num_field(j, path, "cycles_per_bit", p.cycles_per_bit);
  p.frame_s = num_field(j, path, "frame_s", p.frame_s);
  p.hap_tx_power_w = dbm_to_watt(
      num_field(j, path, "hap_tx_power_dbm", watt_to_dbm(p.hap_tx_power_w)));
  p.hap_pos = vec3_field(j, path, "hap_pos", p.hap_pos);
  p.irs_pos = vec3_field(j, path, "irs_pos", p.irs_pos);
  p.pathloss_exp_ad = num_field(j, path, "pathloss_exp_ad", p.pathloss_exp_ad);
  p.pathloss_exp_ai = num_field(j, path, "pathloss_exp_ai", p.pathloss_exp_ai);
  p.pathloss_exp_id = num_field(j, path, "pathloss_exp_id", p.pathloss_exp_id);
  p.ref_gain = db_to_linear(-num_field(j, path, "ref_loss_db",
                                       -linear_to_db(p.ref_gain)));
  p.rician_factor = num_field(j, path, "rician_factor", p.rician_factor);
  p.num_elements = int_field(j, path, "num_elements", p.num_elements);
  p.num_devices = int_field(j, path, "num_devices", p.num_devices);
  return p;
}

MaScheme ma_from_string(const std::string& s, const std::string& path) {
  if (s == "tdma") return MaScheme::Tdma;
  if (s == "noma") return MaScheme::Noma;
  throw SchemaError(path, "expected \"tdma\" or \"noma\"");
}

SchemeSpec parse_scheme(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  SchemeSpec s;
  const json* kind = find(j, "scheme");
  if (!kind || !kind->is_string())
    throw SchemaError(path + ".scheme", "expected a string");
  try {
    s.kind = scheme_kind_from_string(kind->get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path + ".scheme", e.what());
  }
  const int c = int_field(j, path + ".", "case", 2);
  if (c < 1 || c > 3) throw SchemaError(path + ".case", "expected 1, 2, or 3");
  s.dibf = static_cast<DibfCase>(c);
  const json* ma = find(j, "ma");
  if (ma) {
    if (!ma->is_string()) throw SchemaError(path + ".ma", "expected a string");
    s.ma = ma_from_string(ma->get<std::string>(), path + ".ma");
  }
  return s;
}

AoConfig parse_ao(const json& j) {
  AoConfig a;
  const std::string path = "ao.";
  a.epsilon_xi = num_field(j, path, "epsilon_xi", a.epsilon_xi);
  a.max_iters = int_field(j, path, "max_iters", a.max_iters);
  a.restarts = int_field(j, path, "restarts", a.restarts);
  a.seed = static_cast<std::uint64_t>(
      int_field(j, path, "seed", static_cast<int>(a.seed)));
  if (const json* bf = find(j, "bf")) {
    if (!bf->is_object()) throw SchemaError("ao.bf", "expected an object");
    a.bf.max_sca_iters = int_field(*bf, "ao.bf.", "max_sca_iters", a.bf.max_sca_iters);
    a.bf.rel_tol = num_field(*bf, "ao.bf.", "rel_tol", a.bf.rel_tol);
  }
  return a;
}

} // namespace

const char* to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::Solver: return "solver";
    case SchemeKind::FixedWptTime: return "fixed_wpt_time";
    case SchemeKind::FixedPhase: return "fixed_phase";
    case SchemeKind::NoIrs: return "no_irs";
    case SchemeKind::OffloadOnly: return "offload_only";
    case SchemeKind::LocalOnly: return "local_only";
  }
  return "?";
}

SchemeKind scheme_kind_from_string(const std::string& s) {
  for (SchemeKind k : {SchemeKind::Solver, SchemeKind::FixedWptTime,
                       SchemeKind::FixedPhase, SchemeKind::NoIrs,
                       SchemeKind::OffloadOnly, SchemeKind::LocalOnly})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown scheme id: " + s);
}

std::string SchemeSpec::label() const {
  std::string s = to_string(kind);
  s += "_case";
  s += std::to_string(static_cast<int>(dibf));
  s += ma == MaScheme::Tdma ? "_tdma" : "_noma";
  return s;
}

Scenario parse_scenario(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw SchemaError("<root>", "not valid JSON");
  if (!j.is_object()) throw SchemaError("<root>", "expected an object");

  Scenario sc;
  sc.schema_version = int_field(j, "", "schema_version", 0);
  if (sc.schema_version != 1)
    throw SchemaError("schema_version", "expected 1");
  sc.seed_base = static_cast<std::uint64_t>(int_field(j, "", "seed_base", 1));
  sc.mc_realizations = int_field(j, "", "mc_realizations", 50);
  if (sc.mc_realizations < 1)
    throw SchemaError("mc_realizations", "expected >= 1");

  const json* sweep = find(j, "sweep");
  if (!sweep || !sweep->is_object())
    throw SchemaError("sweep", "expected an object");
  const json* axis = find(*sweep, "axis");
  if (!axis || !axis->is_string())
    throw SchemaError("sweep.axis", "expected a string");
  sc.sweep_axis = axis->get<std::string>();
  if (sc.sweep_axis == "PE") sc.sweep_axis = "PE_dbm";
  if (sc.sweep_axis != "N" && sc.sweep_axis != "PE_dbm" && sc.sweep_axis != "C")
    throw SchemaError("sweep.axis", "expected \"N\", \"PE_dbm\", or \"C\"");
  const json* values = find(*sweep, "values");
  if (!values || !values->is_array() || values->empty())
    throw SchemaError("sweep.values", "expected a nonempty array");
  for (const auto& v : *values) {
    if (!v.is_number()) throw SchemaError("sweep.values", "expected numbers");
    sc.sweep_values.push_back(v.get<double>());
  }

  if (const json* params = find(j, "params")) {
    if (!params->is_object()) throw SchemaError("params", "expected an object");
    sc.params = parse_params(*params);
  }

  if (const json* pl = find(j, "placement")) {
    if (!pl->is_object()) throw SchemaError("placement", "expected an object");
    sc.placement.center =
        vec3_field(*pl, "placement.", "center", sc.placement.center);
    sc.placement.radius_m =
        num_field(*pl, "placement.", "radius_m", sc.placement.radius_m);
    if (sc.placement.radius_m <= 0)
      throw SchemaError("placement.radius_m", "expected > 0");
  }

  const json* schemes = find(j, "schemes");
  if (!schemes || !schemes->is_array() || schemes->empty())
    throw SchemaError("schemes", "expected a nonempty array");
  for (std::size_t i = 0; i < schemes->size(); ++i)
    sc.schemes.push_back(
        parse_scheme((*schemes)[i], "schemes[" + std::to_string(i) + "]"));

  if (const json* ao = find(j, "ao")) {
    if (!ao->is_object()) throw SchemaError("ao", "expected an object");
    sc.ao = parse_ao(*ao);
  }

  if (const json* qos = find(j, "qos_min_bits")) {
    if (!qos->is_array()) throw SchemaError("qos_min_bits", "expected an array");
    for (const auto& v : *qos) {
      if (!v.is_number()) throw SchemaError("qos_min_bits", "expected numbers");
      sc.qos_min_bits.push_back(v.get<double>());
    }
    if (static_cast<int>(sc.qos_min_bits.size()) != sc.params.num_devices)
      throw SchemaError("qos_min_bits", "length must equal params.num_devices");
  }

  sc.fixed_wpt_tau0_frac =
      num_field(j, "", "fixed_wpt_tau0_frac", sc.fixed_wpt_tau0_frac);
  if (sc.fixed_wpt_tau0_frac <= 0 || sc.fixed_wpt_tau0_frac >= 1)
    throw SchemaError("fixed_wpt_tau0_frac", "expected in (0, 1)");
  sc.num_threads = int_field(j, "", "num_threads", 0);
  return sc;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("<file>", "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace

Scenario load_scenario(const std::string& path) {
  return parse_scenario(slurp(path));
}

InstanceSpec parse_instance(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw SchemaError("<root>", "not valid JSON");
  if (!j.is_object()) throw SchemaError("<root>", "expected an object");
  const int version = int_field(j, "", "schema_version", 0);
  if (version != 1) throw SchemaError("schema_version", "expected 1");

  InstanceSpec spec;
  spec.seed = static_cast<std::uint64_t>(int_field(j, "", "seed", 1));
  const int c = int_field(j, "", "case", 2);
  if (c < 1 || c > 3) throw SchemaError("case", "expected 1, 2, or 3");
  spec.dibf = static_cast<DibfCase>(c);
  if (const json* ma = find(j, "ma")) {
    if (!ma->is_string()) throw SchemaError("ma", "expected a string");
    spec.ma = ma_from_string(ma->get<std::string>(), "ma");
  }

  const json* params = find(j, "params");
  if (!params || !params->is_object())
    throw SchemaError("params", "expected an object");
  spec.params = parse_params(*params);

  bool explicit_positions = false;
  if (const json* pos = find(*params, "device_positions")) {
    if (!pos->is_array())
      throw SchemaError("params.device_positions", "expected an array");
    for (std::size_t i = 0; i < pos->size(); ++i) {
      json wrap;
      wrap["p"] = (*pos)[i];
      spec.params.device_positions.push_back(vec3_field(
          wrap, "params.device_positions[" + std::to_string(i) + "]", "p", {}));
    }
    if (static_cast<int>(spec.params.device_positions.size()) !=
        spec.params.num_devices)
      throw SchemaError("params.device_positions",
                        "length must equal params.num_devices");
    explicit_positions = true;
  }
  if (!explicit_positions) {
    PlacementSpec placement;
    if (const json* pl = find(j, "placement")) {
      if (!pl->is_object()) throw SchemaError("placement", "expected an object");
      placement.center = vec3_field(*pl, "placement.", "center", placement.center);
      placement.radius_m =
          num_field(*pl, "placement.", "radius_m", placement.radius_m);
      if (placement.radius_m <= 0)
        throw SchemaError("placement.radius_m", "expected > 0");
    }
    spec.params.device_positions = draw_positions(
        placement, spec.params.num_devices, splitmix64(spec.seed ^ 0x706f73ull));
  }

  if (const json* ao = find(j, "ao")) {
    if (!ao->is_object()) throw SchemaError("ao", "expected an object");
    spec.ao = parse_ao(*ao);
  }
  if (const json* qos = find(j, "qos_min_bits")) {
    if (!qos->is_array()) throw SchemaError("qos_min_bits", "expected an array");
    for (const auto& v : *qos) {
      if (!v.is_number()) throw SchemaError("qos_min_bits", "expected numbers");
      spec.qos_min_bits.push_back(v.get<double>());
    }
    if (static_cast<int>(spec.qos_min_bits.size()) != spec.params.num_devices)
      throw SchemaError("qos_min_bits", "length must equal params.num_devices");
  }

  try {
    spec.params.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError("params", e.what());
  }
  return spec;
}

InstanceSpec load_instance(const std::string& path) {
  return parse_instance(slurp(path));
}

std::vector<Vec3> draw_positions(const PlacementSpec& placement, int K,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> pos(K);
  for (int k = 0; k < K; ++k) {
    const double r = placement.radius_m * std::sqrt(uniform01(rng));
    const double th = 2.0 * std::numbers::pi * uniform01(rng);
    pos[k] = Vec3{placement.center.x + r * std::cos(th),
                  placement.center.y + r * std::sin(th), placement.center.z};
  }
  return pos;
}

SystemParams apply_sweep(const SystemParams& base, const std::string& axis,
                         double value) {
  SystemParams p = base;
  if (axis == "N") {
    p.num_elements = static_cast<int>(std::lround(value));
  } else if (axis == "PE_dbm") {
    p.hap_tx_power_w = dbm_to_watt(value);
  } else if (axis == "C") {
    p.cycles_per_bit = value;
  } else {
    throw std::invalid_argument("unknown sweep axis: " + axis);
  }
  return p;
}

namespace {

Solution solve_fixed_phase(const SystemParams& params, const ChannelRealization& chan,
                           const SchemeSpec& which, const AoConfig& ao) {
  const int K = chan.num_devices();
  BeamSet beams;
  beams.v0 = BeamVector::unit(params.num_elements);
  switch (which.dibf) {
    case DibfCase::Case1: break;
    case DibfCase::Case2: beams.v1 = {beams.v0}; break;
    case DibfCase::Case3: beams.v1.assign(K, beams.v0); break;
  }
  RaProblem p;
  p.params = &params;
  p.ma = which.ma;
  p.qos_min_bits = ao.qos_min_bits;
  p.gain_wpt.resize(K);
  p.gain_off.resize(K);
  for (int k = 0; k < K; ++k) {
    p.gain_wpt[k] = equivalent_gain(chan, beams.v0, k);
    p.gain_off[k] = offload_gain(chan, beams, which.dibf, k);
  }
  RaResult ra = solve_ra(p);
  Solution s;
  s.objective_bits = ra.objective_bits;
  s.alloc = ra.alloc;
  s.beams = beams;
  s.dibf = which.dibf;
  s.ma = which.ma;
  s.kkt = ra.kkt;
  s.offload_active = ra.offload_active;
  s.iterations = 1;
  return s;
}

} // namespace

Solution benchmark_schemes(const SystemParams& params, const ChannelRealization& chan,
                           const SchemeSpec& which, const AoConfig& ao,
                           double fixed_wpt_tau0_frac) {
  AoConfig cfg = ao;
  switch (which.kind) {
    case SchemeKind::Solver:
      return solve_instance(params, chan, which.dibf, which.ma, cfg);
    case SchemeKind::FixedWptTime:
      cfg.fixed_tau0 = fixed_wpt_tau0_frac * params.frame_s;
      return solve_instance(params, chan, which.dibf, which.ma, cfg);
    case SchemeKind::FixedPhase:
      return solve_fixed_phase(params, chan, which, cfg);
    case SchemeKind::NoIrs: {
      SystemParams p0 = params;
      p0.num_elements = 0;
      const ChannelRealization chan0 = generate_channels(p0, chan.seed);
      return solve_instance(p0, chan0, which.dibf, which.ma, cfg);
    }
    case SchemeKind::OffloadOnly:
      cfg.forbid_local = true;
      return solve_instance(params, chan, which.dibf, which.ma, cfg);
    case SchemeKind::LocalOnly:
      cfg.forbid_offload = true;
      return solve_instance(params, chan, which.dibf, which.ma, cfg);
  }
  throw std::invalid_argument("unknown benchmark id");
}

std::vector<double> harvested_per_device(const SystemParams& params,
                                         const ChannelRealization& chan,
                                         const SchemeSpec& which,
                                         const Solution& sol) {
  const int K = chan.num_devices();
  std::vector<double> out(K, 0.0);
  if (which.kind == SchemeKind::NoIrs) {
    SystemParams p0 = params;
    p0.num_elements = 0;
    const ChannelRealization chan0 = generate_channels(p0, chan.seed);
    for (int k = 0; k < K; ++k)
      out[k] = harvested_energy(p0, chan0, sol.beams.v0, sol.alloc.tau0, k);
    return out;
  }
  for (int k = 0; k < K; ++k)
    out[k] = harvested_energy(params, chan, sol.beams.v0, sol.alloc.tau0, k);
  return out;
}

ScenarioResult run_scenario(const Scenario& scenario) {
  const int V = static_cast<int>(scenario.sweep_values.size());
  const int R = scenario.mc_realizations;
  const int S = static_cast<int>(scenario.schemes.size());

  AoConfig base_ao = scenario.ao;
  if (!scenario.qos_min_bits.empty()) base_ao.qos_min_bits = scenario.qos_min_bits;

  // One task per (sweep value, realization); schemes share the channel draw.
  const int tasks = V * R;
  std::vector<std::vector<RunRecord>> rows(tasks);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&]() {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= tasks) return;
      try {
        const int vi = t / R;
        const int r = t % R;
        const double value = scenario.sweep_values[vi];
        SystemParams p = apply_sweep(scenario.params, scenario.sweep_axis, value);
        p.device_positions = draw_positions(
            scenario.placement, p.num_devices,
            splitmix64(scenario.seed_base ^ (0x706f73ull + 2ull * r)));
        p.validate();
        const std::uint64_t chan_seed =
            splitmix64(scenario.seed_base + 0x636861ull * (r + 1));
        const ChannelRealization chan = generate_channels(p, chan_seed);
        for (int si = 0; si < S; ++si) {
          const SchemeSpec& sch = scenario.schemes[si];
          const auto t0 = std::chrono::steady_clock::now();
          Solution sol = benchmark_schemes(p, chan, sch, base_ao,
                                           scenario.fixed_wpt_tau0_frac);
          const auto t1 = std::chrono::steady_clock::now();
          RunRecord rec;
          rec.scheme = sch.label();
          rec.sweep_value = value;
          rec.realization = r;
          rec.objective_bits = sol.objective_bits;
          rec.tau0 = sol.alloc.tau0;
          rec.harvested_j = harvested_per_device(p, chan, sch, sol);
          rec.iterations = sol.iterations;
          rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
          rows[t].push_back(std::move(rec));
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  int nthreads = scenario.num_threads > 0
                     ? scenario.num_threads
                     : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min(nthreads, tasks));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  ScenarioResult out;
  for (auto& group : rows)
    for (auto& rec : group) out.runs.push_back(std::move(rec));
  std::sort(out.runs.begin(), out.runs.end(),
            [](const RunRecord& a, const RunRecord& b) {
              if (a.scheme != b.scheme) return a.scheme < b.scheme;
              if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
              return a.realization < b.realization;
            });

  std::ostringstream runs;
  runs << "scheme,sweep_axis,sweep_value,realization,objective_bits,tau0_s,"
          "harvested_j,iterations,wall_time_s\n";
  for (const auto& r : out.runs) {
    runs << r.scheme << ',' << scenario.sweep_axis << ',' << fmt(r.sweep_value)
         << ',' << r.realization << ',' << fmt(r.objective_bits) << ','
         << fmt(r.tau0) << ',';
    for (std::size_t k = 0; k < r.harvested_j.size(); ++k)
      runs << (k ? ";" : "") << fmt(r.harvested_j[k]);
    runs << ',' << r.iterations << ',' << fmt(r.wall_time_s) << '\n';
  }
  out.runs_csv = runs.str();

  std::ostringstream summary;
  summary << "scheme,sweep_axis,sweep_value,realizations,mean_objective_bits,"
             "mean_tau0_s,mean_harvested_per_device_j,mean_iterations\n";
  for (std::size_t i = 0; i < out.runs.size();) {
    std::size_t j = i;
    double obj = 0, tau0 = 0, harv = 0, iters = 0;
    int ndev = 0;
    while (j < out.runs.size() && out.runs[j].scheme == out.runs[i].scheme &&
           out.runs[j].sweep_value == out.runs[i].sweep_value) {
      obj += out.runs[j].objective_bits;
      tau0 += out.runs[j].tau0;
      for (double h : out.runs[j].harvested_j) harv += h;
      ndev += static_cast<int>(out.runs[j].harvested_j.size());
      iters += out.runs[j].iterations;
      ++j;
    }
    const double n = static_cast<double>(j - i);
    summary << out.runs[i].scheme << ',' << scenario.sweep_axis << ','
            << fmt(out.runs[i].sweep_value) << ',' << (j - i) << ','
            << fmt(obj / n) << ',' << fmt(tau0 / n) << ','
            << fmt(ndev ? harv / ndev : 0.0) << ',' << fmt(iters / n) << '\n';
    i = j;
  }
  out.summary_csv = summary.str();

  json meta;
  meta["schema_version"] = scenario.schema_version;
  meta["seed_base"] = scenario.seed_base;
  meta["sweep_axis"] = scenario.sweep_axis;
  meta["sweep_values"] = scenario.sweep_values;
  meta["mc_realizations"] = scenario.mc_realizations;
  meta["fixed_wpt_tau0_s"] = scenario.fixed_wpt_tau0_frac * scenario.params.frame_s;
  std::vector<std::string> labels;
  for (const auto& s : scenario.schemes) labels.push_back(s.label());
  meta["schemes"] = labels;
  out.metadata_json = meta.dump(2) + "\n";
  return out;
}

void write_scenario_csvs(const ScenarioResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream f(std::filesystem::path(out_dir) / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out_dir + "/" + name);
    f << text;
  };
  write("runs.csv", result.runs_csv);
  write("summary.csv", result.summary_csv);
  write("metadata.json", result.metadata_json);
}

std::string default_scenario_json() {
  return R"({
  "schema_version": 1,
  "seed_base": 1,
  "mc_realizations": 50,
  "sweep": {"axis": "N", "values": [4, 8, 16, 32]},
  "params": {
    "bandwidth_hz": 500000.0,
    "noise_power_dbm": -75.0,
    "eh_efficiency": 0.8,
    "cpu_energy_coeff": 1e-28,
    "cycles_per_bit": 800,
    "frame_s": 1.0,
    "hap_tx_power_dbm": 40.0,
    "hap_pos": [0.0, 0.0, 0.0],
    "irs_pos": [10.0, 0.0, 3.0],
    "pathloss_exp_ad": 3.0,
    "pathloss_exp_ai": 2.2,
    "pathloss_exp_id": 2.2,
    "ref_loss_db": 30.0,
    "rician_factor": 2.0,
    "num_devices": 5
  },
  "placement": {"center": [10.0, 0.0, 0.0], "radius_m": 1.5},
  "schemes": [
    {"scheme": "solver", "case": 2, "ma": "tdma"},
    {"scheme": "solver", "case": 3, "ma": "tdma"},
    {"scheme": "fixed_wpt_time", "case": 2, "ma": "tdma"},
    {"scheme": "fixed_phase", "case": 2, "ma": "tdma"},
    {"scheme": "no_irs", "case": 2, "ma": "tdma"},
    {"scheme": "offload_only", "case": 2, "ma": "tdma"},
    {"scheme": "local_only", "case": 2, "ma": "tdma"}
  ],
  "ao": {"epsilon_xi": 0.0001, "max_iters": 50, "restarts": 3, "seed": 1},
  "fixed_wpt_tau0_frac": 0.5,
  "num_threads": 0
}
)";
}

} // namespace wpmec
