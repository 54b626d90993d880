// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance gate: eight numbered checks, one PASS/FAIL line each.
// Exit status is the number of failed checks.

#include "wpmec/ao.hpp"
#include "wpmec/experiments.hpp"
#include "wpmec/irs_bf.hpp"
#include "wpmec/model.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/resource_alloc.hpp"
#include "wpmec/single_user.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace wpmec;

namespace {

struct Check {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
};

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

SystemParams instance_params(int K, int N, std::uint64_t seed) {
  SystemParams p;
  p.num_devices = K;
  p.num_elements = N;
  p.device_positions = draw_positions(PlacementSpec{}, K, seed ^ 0x706f73ull);
  return p;
}

// Shared pool of converged Case-2 TDMA solutions, reused by checks 1-3 and 6.
struct SolvedInstance {
  SystemParams params;
  ChannelRealization chan;
  Solution c2;
};

std::vector<SolvedInstance> solve_pool(const AoConfig& cfg) {
  std::vector<SolvedInstance> pool;
  std::uint64_t seed = 100;
  for (int K : {2, 3})
    for (int N : {4, 8})
      for (int i = 0; i < 5; ++i) {
        SolvedInstance si;
        si.params = instance_params(K, N, ++seed);
        si.chan = generate_channels(si.params, seed * 7919);
        si.c2 = solve_case2_tdma(si.params, si.chan, cfg);
        pool.push_back(std::move(si));
      }
  return pool;
}

// 1. Case-2 TDMA/NOMA equality through the mapping pair, with exact
//    feasibility of both mapped solutions.
Check check1(const std::vector<SolvedInstance>& pool) {
  Check c;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& si = pool[i];
    const Solution noma = noma_from_tdma(si.params, si.chan, si.c2);
    const Solution back = tdma_from_noma(si.params, si.chan, noma);
    const double scale = std::max(1.0, si.c2.objective_bits);
    const double gap1 = std::abs(noma.objective_bits - si.c2.objective_bits) / scale;
    const double gap2 = std::abs(back.objective_bits - si.c2.objective_bits) / scale;
    if (gap1 > 1e-6 || gap2 > 1e-6)
      c.fail("instance " + std::to_string(i) + " map gap " +
             std::to_string(std::max(gap1, gap2)));
    const FeasibilityReport f1 = check_feasibility(si.params, si.chan, noma.beams,
                                                   noma.alloc, noma.dibf, noma.ma);
    const FeasibilityReport f2 = check_feasibility(si.params, si.chan, back.beams,
                                                   back.alloc, back.dibf, back.ma);
    if (!f1.feasible || !f2.feasible)
      c.fail("instance " + std::to_string(i) + " mapped solution infeasible");
  }
  return c;
}

// 2. Six-way objective chain on the pool instances, plus the high-C regime
//    where Case 1 approaches Case 2.
Check check2(const std::vector<SolvedInstance>& pool, const AoConfig& cfg) {
  Check c;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& si = pool[i];
    const ChainReport rep = verify_chain(si.params, si.chan, cfg, 1e-6, 1e-6);
    if (!rep.ok)
      c.fail("instance " + std::to_string(i) + " chain eq=" +
             std::to_string(rep.worst_equality_gap) +
             " slack=" + std::to_string(rep.worst_inequality_slack));
    SystemParams high_c = si.params;
    high_c.cycles_per_bit = 1e6;
    // Near-equality of Cases 1 and 2 under expensive local computing needs
    // well-converged solves: tighten the stop rule and chain warm starts
    // (Case 1 from the pool's Case-2 offloading beam, Case 2 from Case 1).
    AoConfig tight = cfg;
    tight.epsilon_xi = 1e-6;
    tight.max_iters = 200;
    BeamSet w1;
    w1.v0 = si.c2.beams.v1.empty() ? si.c2.beams.v0 : si.c2.beams.v1[0];
    const Solution h1 = solve_case1_tdma(high_c, si.chan, tight, &w1);
    BeamSet warm = h1.beams;
    warm.v1 = {h1.beams.v0};
    const Solution h2 = solve_case2_tdma(high_c, si.chan, tight, &warm);
    const double gap = std::abs(h2.objective_bits - h1.objective_bits) /
                       std::max(1.0, std::max(h1.objective_bits, h2.objective_bits));
    if (gap > 1e-3)
      c.fail("instance " + std::to_string(i) + " high-C c1/c2 gap " +
             std::to_string(gap));
  }
  return c;
}

// 3. Equal-SNR structure and tight energy at converged Case-2 solutions.
Check check3(const std::vector<SolvedInstance>& pool) {
  Check c;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& si = pool[i];
    const Solution& s = si.c2;
    const double s2 = si.params.noise_power_w;
    double snr_min = 1e300, snr_max = 0;
    for (int k : s.offload_active) {
      const double g = offload_gain(si.chan, s.beams, s.dibf, k);
      const double snr = s.alloc.energy[k] * g / (s.alloc.tau1[k] * s2);
      snr_min = std::min(snr_min, snr);
      snr_max = std::max(snr_max, snr);

      const double f = s.alloc.freq[k];
      const double use = s.alloc.energy[k] + si.params.frame_s *
                                                 si.params.cpu_energy_coeff * f * f * f;
      const double cap =
          harvested_energy(si.params, si.chan, s.beams.v0, s.alloc.tau0, k);
      if (std::abs(use - cap) > 1e-9 * cap)
        c.fail("instance " + std::to_string(i) + " device " + std::to_string(k) +
               " energy gap " + std::to_string((use - cap) / cap));
    }
    if (s.offload_active.size() > 1 && (snr_max - snr_min) > 1e-6 * snr_max)
      c.fail("instance " + std::to_string(i) + " SNR spread " +
             std::to_string((snr_max - snr_min) / snr_max));
  }
  return c;
}

// 4. Single-user closed form beats a 50^3 feasibility grid; the activation
//    decision flips across the threshold; the threshold decreases in h.
Check check4() {
  Check c;
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 10; ++trial) {
    SystemParams p;
    p.num_devices = 1;
    p.hap_tx_power_w = 1.0 + 30.0 * u01(rng);
    p.cycles_per_bit = 300.0 + 2000.0 * u01(rng);
    const double h = std::pow(10.0, -7.5 + 3.0 * u01(rng));
    const Solution sol = solve_single_user_gain(p, h);

    const double T = p.frame_s;
    const double epe = p.eh_efficiency * p.hap_tx_power_w * h;
    double best = 0;
    const int G = 50;
    for (int a = 0; a < G; ++a) {
      const double tau0 = T * (a + 1) / G;
      const double tau1 = T - tau0;
      const double cap = tau0 * epe;
      for (int b = 0; b < G; ++b) {
        const double e = cap * b / (G - 1);
        const double f_max = std::cbrt((cap - e) / (T * p.cpu_energy_coeff));
        for (int d = 0; d < G; ++d) {
          const double f = f_max * d / (G - 1);
          const double bits =
              rate_term_bits(p.bandwidth_hz, tau1, e, h, p.noise_power_w) +
              T * f / p.cycles_per_bit;
          best = std::max(best, bits);
        }
      }
    }
    const double gap = (sol.objective_bits - best) / std::max(1.0, best);
    if (gap < -1e-4)
      c.fail("trial " + std::to_string(trial) + " grid gap " + std::to_string(gap));

    // The threshold is self-consistent (it depends on P_E through p*): find
    // the power where the optimal decision flips and check it sits at the
    // fixed point P_E = thre(h; P_E), with offloading on just above and off
    // just below.
    const auto activated = [&](double pe) {
      SystemParams q = p;
      q.hap_tx_power_w = pe;
      return analyze_single_user(q, h).activated;
    };
    double lo = 1e-12, hi = 1e8;
    if (activated(lo) || !activated(hi)) {
      c.fail("trial " + std::to_string(trial) + " activation not bracketed");
    } else {
      for (int it = 0; it < 80; ++it) {
        const double mid = std::sqrt(lo * hi);
        (activated(mid) ? hi : lo) = mid;
      }
      SystemParams q = p;
      q.hap_tx_power_w = hi;
      const double thre = activation_threshold(q, h);
      if (std::abs(hi - thre) > 1e-6 * thre)
        c.fail("trial " + std::to_string(trial) + " threshold not self-consistent");
      q.hap_tx_power_w = thre * 1.001;
      if (!(solve_single_user_gain(q, h).alloc.tau1[0] > 0))
        c.fail("trial " + std::to_string(trial) + " no activation above threshold");
      q.hap_tx_power_w = thre * 0.999;
      if (!(solve_single_user_gain(q, h).alloc.tau1[0] == 0))
        c.fail("trial " + std::to_string(trial) + " activation below threshold");
    }
  }

  SystemParams p;
  p.num_devices = 1;
  // Strict decrease holds on the operationally reachable gain range; beyond
  // h ~ 1e-4 the p* h^3 term eventually dominates and the threshold turns up.
  double prev = 1e300;
  for (int i = 0; i < 100; ++i) {
    const double h = std::pow(10.0, -8.0 + 3.0 * i / 99.0);
    const double t = activation_threshold(p, h);
    if (!(t < prev)) c.fail("threshold not strictly decreasing at point " +
                            std::to_string(i));
    prev = t;
  }
  return c;
}

// 5. AO solver vs the quantized-phase brute force on tiny instances, every
//    case/MA combination.
Check check5(std::vector<std::vector<double>>& traces) {
  Check c;
  OracleConfig oc;
  oc.phase_levels = 64;
  struct Inst { int K, N; std::uint64_t seed; };
  std::vector<Inst> insts;
  for (std::uint64_t s : {1ull, 2ull, 3ull, 4ull, 5ull, 6ull}) insts.push_back({1, 2, s});
  for (std::uint64_t s : {3ull, 9ull, 11ull, 12ull}) insts.push_back({2, 2, s});
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const SystemParams p = instance_params(insts[i].K, insts[i].N, insts[i].seed);
    const ChannelRealization chan = generate_channels(p, insts[i].seed);
    for (DibfCase dibf : {DibfCase::Case1, DibfCase::Case2, DibfCase::Case3})
      for (MaScheme ma : {MaScheme::Tdma, MaScheme::Noma}) {
        const Solution sol = solve_instance(p, chan, dibf, ma, {});
        traces.push_back(sol.trace);
        const OracleValue o = brute_force_rate(p, chan, dibf, ma, oc);
        if (sol.objective_bits < o.bits - o.slack)
          c.fail("instance " + std::to_string(i) + " case" +
                 std::to_string(static_cast<int>(dibf)) +
                 (ma == MaScheme::Tdma ? " tdma" : " noma") + " below oracle by " +
                 std::to_string(o.bits - o.slack - sol.objective_bits) + " bits");
      }
  }
  return c;
}

// 6. Minorant tangency and global minoration, and monotone AO traces across
//    every recorded run.
Check check6(const std::vector<SolvedInstance>& pool,
             const std::vector<std::vector<double>>& extra_traces) {
  Check c;
  std::mt19937_64 rng(606);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& si = pool[i];
    for (int k = 0; k < si.chan.num_devices(); ++k) {
      const CVec qbar = extended_channel(si.chan, k);
      const CVec anchor = extend_beam(si.c2.beams.v0);
      const double truth = std::norm(qbar.dot(anchor));
      const double tangent = sca_lower_bound(qbar, anchor, anchor);
      if (std::abs(tangent - truth) > 1e-12 * std::max(1.0, truth))
        c.fail("instance " + std::to_string(i) + " tangency gap");
      for (int t = 0; t < 1000; ++t) {
        BeamVector v;
        v.entries.resize(si.params.num_elements);
        for (int n = 0; n < si.params.num_elements; ++n)
          v.entries[n] = std::polar(u01(rng), 2.0 * std::numbers::pi * u01(rng));
        const CVec vb = extend_beam(v);
        const double lo = sca_lower_bound(qbar, vb, anchor);
        const double hi = std::norm(qbar.dot(vb));
        if (lo > hi + 1e-9 * std::max(1.0, hi)) {
          c.fail("instance " + std::to_string(i) + " minoration violated");
          break;
        }
      }
    }
  }
  auto check_trace = [&](const std::vector<double>& trace) {
    for (std::size_t t = 1; t < trace.size(); ++t)
      if (trace[t] < trace[t - 1] -
                         1e-9 * std::max(1.0, std::abs(trace[t - 1])))
        return false;
    return true;
  };
  for (const auto& si : pool)
    if (!check_trace(si.c2.trace)) c.fail("non-monotone pool trace");
  for (const auto& tr : extra_traces)
    if (!check_trace(tr)) c.fail("non-monotone solver trace");
  return c;
}

// 7. Desk-scale figure trends over >= 20 placement/fading realizations.
Check check7() {
  Check c;
  const int R = 20;
  Scenario base;
  base.params.num_devices = 5;
  base.mc_realizations = R;
  base.seed_base = 77;
  base.ao.restarts = 0;
  base.ao.record_trace = false;

  auto mean_of = [](const ScenarioResult& res, const std::string& scheme,
                    double value, auto&& proj) {
    double acc = 0;
    int n = 0;
    for (const auto& r : res.runs)
      if (r.scheme == scheme && r.sweep_value == value) {
        acc += proj(r);
        ++n;
      }
    return acc / std::max(1, n);
  };
  const auto obj = [](const RunRecord& r) { return r.objective_bits; };
  const auto tau0 = [](const RunRecord& r) { return r.tau0; };
  const auto harv = [](const RunRecord& r) {
    double a = 0;
    for (double h : r.harvested_j) a += h;
    return a / r.harvested_j.size();
  };

  // (a)+(b): N sweep with the full design and the beam benchmarks.
  {
    Scenario sc = base;
    sc.sweep_axis = "N";
    sc.sweep_values = {4, 8, 16, 32};
    sc.schemes = {{SchemeKind::Solver, DibfCase::Case2, MaScheme::Tdma},
                  {SchemeKind::FixedPhase, DibfCase::Case2, MaScheme::Tdma},
                  {SchemeKind::NoIrs, DibfCase::Case2, MaScheme::Tdma}};
    const ScenarioResult res = run_scenario(sc);
    const std::string full = sc.schemes[0].label();
    double prev_obj = 0, prev_tau0 = 2, prev_harv = 0;
    for (double N : sc.sweep_values) {
      const double o = mean_of(res, full, N, obj);
      if (!(o > prev_obj)) c.fail("objective not increasing at N=" +
                                  std::to_string(static_cast<int>(N)));
      if (!(o > mean_of(res, sc.schemes[1].label(), N, obj)))
        c.fail("full design does not beat fixed phases at N=" +
               std::to_string(static_cast<int>(N)));
      if (!(o > mean_of(res, sc.schemes[2].label(), N, obj)))
        c.fail("full design does not beat no-IRS at N=" +
               std::to_string(static_cast<int>(N)));
      const double t0 = mean_of(res, full, N, tau0);
      if (!(t0 < prev_tau0)) c.fail("tau0 not decreasing at N=" +
                                    std::to_string(static_cast<int>(N)));
      const double hv = mean_of(res, full, N, harv);
      if (!(hv > prev_harv)) c.fail("harvest not increasing at N=" +
                                    std::to_string(static_cast<int>(N)));
      prev_obj = o;
      prev_tau0 = t0;
      prev_harv = hv;
    }
  }

  // (c): computing-mode ordering per realization at N = 8.
  {
    Scenario sc = base;
    sc.sweep_axis = "N";
    sc.sweep_values = {8};
    sc.schemes = {{SchemeKind::Solver, DibfCase::Case2, MaScheme::Tdma},
                  {SchemeKind::OffloadOnly, DibfCase::Case2, MaScheme::Tdma},
                  {SchemeKind::LocalOnly, DibfCase::Case2, MaScheme::Tdma}};
    const ScenarioResult res = run_scenario(sc);
    std::map<int, double> partial, off, local;
    for (const auto& r : res.runs) {
      if (r.scheme == sc.schemes[0].label()) partial[r.realization] = r.objective_bits;
      if (r.scheme == sc.schemes[1].label()) off[r.realization] = r.objective_bits;
      if (r.scheme == sc.schemes[2].label()) local[r.realization] = r.objective_bits;
    }
    for (int r = 0; r < R; ++r) {
      const double tol = 1e-6 * partial[r];
      if (!(partial[r] >= off[r] - tol && off[r] >= local[r] - tol))
        c.fail("mode ordering violated at realization " + std::to_string(r));
    }
  }

  // (d): Case-3 advantage over Case-2 grows with N, and is larger at high C.
  {
    std::map<std::pair<double, double>, double> gap;  // (C, N) -> mean gap
    for (double C : {400.0, 2000.0}) {
      Scenario sc = base;
      sc.params.cycles_per_bit = C;
      sc.sweep_axis = "N";
      sc.sweep_values = {4, 8, 16, 32};
      sc.schemes = {{SchemeKind::Solver, DibfCase::Case2, MaScheme::Tdma},
                    {SchemeKind::Solver, DibfCase::Case3, MaScheme::Tdma}};
      const ScenarioResult res = run_scenario(sc);
      for (double N : sc.sweep_values)
        gap[{C, N}] = mean_of(res, sc.schemes[1].label(), N, obj) -
                      mean_of(res, sc.schemes[0].label(), N, obj);
    }
    for (double C : {400.0, 2000.0}) {
      double prev = -1e300;
      for (double N : {4.0, 8.0, 16.0, 32.0}) {
        if (!(gap[{C, N}] > prev))
          c.fail("case3-case2 gap not widening at C=" + std::to_string(C) +
                 " N=" + std::to_string(N));
        prev = gap[{C, N}];
      }
    }
    for (double N : {4.0, 8.0, 16.0, 32.0})
      if (!(gap[{2000.0, N}] > gap[{400.0, N}]))
        c.fail("case3-case2 gap not larger at C=2000 for N=" + std::to_string(N));
  }
  return c;
}

// 8. Byte-identical sweep outputs modulo the wall-time column.
Check check8() {
  Check c;
  Scenario sc;
  sc.params.num_devices = 3;
  sc.mc_realizations = 3;
  sc.seed_base = 8;
  sc.sweep_axis = "N";
  sc.sweep_values = {4, 8};
  sc.schemes = {{SchemeKind::Solver, DibfCase::Case2, MaScheme::Tdma},
                {SchemeKind::FixedWptTime, DibfCase::Case2, MaScheme::Tdma},
                {SchemeKind::NoIrs, DibfCase::Case2, MaScheme::Tdma}};
  sc.ao.restarts = 1;
  const ScenarioResult a = run_scenario(sc);
  sc.num_threads = 2;  // gather order must not matter
  const ScenarioResult b = run_scenario(sc);
  auto strip_wall = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) {
      out += line.substr(0, line.rfind(','));
      out += '\n';
    }
    return out;
  };
  if (strip_wall(a.runs_csv) != strip_wall(b.runs_csv))
    c.fail("runs.csv differs between repeated sweeps");
  if (a.summary_csv != b.summary_csv) c.fail("summary.csv differs");
  if (a.metadata_json != b.metadata_json) c.fail("metadata.json differs");
  return c;
}

int report(int idx, const char* name, const Check& c) {
  std::printf("%d. %-28s %s%s%s\n", idx, name, c.ok ? "PASS" : "FAIL",
              c.detail.empty() ? "" : " — ", c.detail.c_str());
  std::fflush(stdout);
  return c.ok ? 0 : 1;
}

} // namespace

int main() {
  AoConfig cfg;  // defaults; chain checks reuse warm starts internally
  int failures = 0;

  const std::vector<SolvedInstance> pool = solve_pool(cfg);
  std::vector<std::vector<double>> traces;

  failures += report(1, "TDMA/NOMA map equality", check1(pool));
  failures += report(2, "objective chain + high-C", check2(pool, cfg));
  failures += report(3, "equal-SNR / tight energy", check3(pool));
  failures += report(4, "single-user optimality", check4());
  failures += report(5, "brute-force oracle parity", check5(traces));
  failures += report(6, "SCA minorants + ascent", check6(pool, traces));
  failures += report(7, "figure trends", check7());
  failures += report(8, "deterministic sweeps", check8());
  return failures;
}
