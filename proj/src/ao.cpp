// SPDX-License-Identifier: Apache-2.0
#include "wpmec/ao.hpp"

#include "wpmec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace wpmec {

namespace {

RaProblem make_ra_problem(const SystemParams& params, const ChannelRealization& chan,
                          const BeamSet& beams, DibfCase dibf, MaScheme ma,
                          const AoConfig& cfg) {
  RaProblem p;
  p.params = &params;
  p.ma = ma;
  p.fixed_tau0 = cfg.fixed_tau0;
  p.qos_min_bits = cfg.qos_min_bits;
  p.forbid_offload = cfg.forbid_offload;
  p.forbid_local = cfg.forbid_local;
  const int K = chan.num_devices();
  p.gain_wpt.resize(K);
  p.gain_off.resize(K);
  for (int k = 0; k < K; ++k) {
    p.gain_wpt[k] = equivalent_gain(chan, beams.v0, k);
    p.gain_off[k] = offload_gain(chan, beams, dibf, k);
  }
  return p;
}

Solution pack(const RaResult& ra, const BeamSet& beams, DibfCase dibf) {
  Solution s;
  s.objective_bits = ra.objective_bits;
  s.alloc = ra.alloc;
  s.beams = beams;
  s.dibf = dibf;
  s.ma = MaScheme::Tdma;
  s.kkt = ra.kkt;
  s.offload_active = ra.offload_active;
  return s;
}

BeamVector random_phase_beam(int n, std::mt19937_64& rng) {
  BeamVector v;
  v.mode = ModulusMode::UnitModulus;
  v.entries = CVec(n);
  for (int i = 0; i < n; ++i) {
    // 53-bit uniform in [0,1); identical across platforms
    const double u =
        static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
    v.entries[i] = std::polar(1.0, 2.0 * std::numbers::pi * u);
  }
  return v;
}

BeamSet project_beams(const BeamSet& b) {
  BeamSet out;
  out.v0 = project_unit_modulus(b.v0);
  out.v1.reserve(b.v1.size());
  for (const auto& v : b.v1) out.v1.push_back(project_unit_modulus(v));
  return out;
}

// One AO run from a unit-modulus start. The start itself stays a candidate,
// so the run never returns less than its warm start achieves.
Solution run_ao(const SystemParams& params, const ChannelRealization& chan,
                DibfCase dibf, const BeamSet& start, const AoConfig& cfg) {
  BeamSet beams = start;
  RaResult ra = solve_ra(make_ra_problem(params, chan, beams, dibf, MaScheme::Tdma, cfg));
  Solution floor_sol = pack(ra, beams, dibf);
  const int N = params.num_elements;
  if (N == 0 || cfg.max_iters < 1) return floor_sol;

  double cur = ra.objective_bits;
  std::vector<double> trace{cur};
  ScaState st;
  st.v0 = beams.v0;
  st.v1 = dibf == DibfCase::Case2 ? beams.v1[0] : beams.v0;

  int iters = 0;
  for (int l = 1; l <= cfg.max_iters; ++l) {
    iters = l;
    st = solve_bf_subproblem(st, ra.alloc, params, chan, dibf, MaScheme::Tdma,
                             cfg.bf);
    BeamSet cand = beams;
    cand.v0 = st.v0;
    if (dibf == DibfCase::Case2) cand.v1 = {st.v1};
    RaResult ra2 =
        solve_ra(make_ra_problem(params, chan, cand, dibf, MaScheme::Tdma, cfg));
    if (ra2.objective_bits >= cur) {
      beams = cand;
      ra = ra2;
    }
    const double next = std::max(cur, ra2.objective_bits);
    const double inc = next - cur;
    cur = next;
    trace.push_back(cur);
    if (inc <= cfg.epsilon_xi * std::max(cur, 1e-12)) break;
  }

  const BeamSet proj = project_beams(beams);
  RaResult raf = solve_ra(make_ra_problem(params, chan, proj, dibf, MaScheme::Tdma, cfg));
  Solution s = raf.objective_bits >= floor_sol.objective_bits
                   ? pack(raf, proj, dibf)
                   : floor_sol;
  s.iterations = iters;
  if (cfg.record_trace) s.trace = std::move(trace);
  return s;
}

Solution best_over_starts(const SystemParams& params, const ChannelRealization& chan,
                          DibfCase dibf, const AoConfig& cfg,
                          const BeamSet* warm) {
  const int N = params.num_elements;
  const int K = chan.num_devices();

  std::vector<BeamVector> fixed_v1;  // Case-3 per-device closed-form beams
  if (dibf == DibfCase::Case3) {
    fixed_v1.reserve(K);
    for (int k = 0; k < K; ++k) fixed_v1.push_back(case3_optimal_phases(chan, k));
  }

  auto complete = [&](BeamVector v0) {
    BeamSet b;
    b.v0 = std::move(v0);
    switch (dibf) {
      case DibfCase::Case1: break;
      case DibfCase::Case2: b.v1 = {b.v0}; break;
      case DibfCase::Case3: b.v1 = fixed_v1; break;
    }
    return b;
  };

  std::vector<BeamSet> starts;
  if (warm) {
    BeamSet w = *warm;
    if (dibf == DibfCase::Case3) w.v1 = fixed_v1;
    if (dibf == DibfCase::Case2 && w.v1.empty()) w.v1 = {w.v0};
    if (dibf == DibfCase::Case1) w.v1.clear();
    starts.push_back(std::move(w));
  }
  starts.push_back(complete(default_start_beam(chan)));
  for (int r = 0; r < cfg.restarts && N > 0; ++r) {
    std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ull * (r + 1));
    starts.push_back(complete(random_phase_beam(N, rng)));
  }

  Solution best;
  bool have = false;
  for (const auto& s0 : starts) {
    Solution s = run_ao(params, chan, dibf, s0, cfg);
    if (!have || s.objective_bits > best.objective_bits) {
      best = std::move(s);
      have = true;
    }
    if (N == 0) break;  // all starts identical without an IRS
  }
  return best;
}

Solution noma_case3_from_case2(const SystemParams& params,
                               const ChannelRealization& chan,
                               const Solution& noma_c2) {
  Solution s = noma_c2;
  s.dibf = DibfCase::Case3;
  const int K = chan.num_devices();
  s.beams.v1.assign(K, noma_c2.beams.v1.empty() ? noma_c2.beams.v0
                                                : noma_c2.beams.v1[0]);
  // Equal per-slot split; every slot sees the same beam, so the sum rate is
  // unchanged.
  const double tau1 = s.alloc.tau1.empty() ? 0.0 : s.alloc.tau1[0];
  s.alloc.tau1.assign(K, tau1 / K);
  s.objective_bits = objective_bits(params, chan, s.beams, s.alloc, s.dibf, s.ma);
  return s;
}

} // namespace

BeamVector default_start_beam(const ChannelRealization& chan) {
  const int K = chan.num_devices();
  int strongest = 0;
  double best = -1;
  for (int k = 0; k < K; ++k) {
    double sum = 0;
    for (Eigen::Index n = 0; n < chan.q_cascaded[k].size(); ++n)
      sum += std::abs(chan.q_cascaded[k][n]);
    if (sum > best) {
      best = sum;
      strongest = k;
    }
  }
  return case3_optimal_phases(chan, strongest);
}

Solution solve_case1_tdma(const SystemParams& params, const ChannelRealization& chan,
                          const AoConfig& cfg, const BeamSet* warm) {
  return best_over_starts(params, chan, DibfCase::Case1, cfg, warm);
}

Solution solve_case2_tdma(const SystemParams& params, const ChannelRealization& chan,
                          const AoConfig& cfg, const BeamSet* warm) {
  return best_over_starts(params, chan, DibfCase::Case2, cfg, warm);
}

Solution solve_case3_tdma(const SystemParams& params, const ChannelRealization& chan,
                          const AoConfig& cfg, const BeamSet* warm) {
  return best_over_starts(params, chan, DibfCase::Case3, cfg, warm);
}

Solution solve_noma(const SystemParams& params, const ChannelRealization& chan,
                    const AoConfig& cfg, DibfCase dibf) {
  switch (dibf) {
    case DibfCase::Case1:
      return noma_from_tdma(params, chan, solve_case1_tdma(params, chan, cfg));
    case DibfCase::Case2:
      return noma_from_tdma(params, chan, solve_case2_tdma(params, chan, cfg));
    case DibfCase::Case3: {
      const Solution c2 =
          noma_from_tdma(params, chan, solve_case2_tdma(params, chan, cfg));
      return noma_case3_from_case2(params, chan, c2);
    }
  }
  throw std::invalid_argument("bad case");
}

Solution solve_instance(const SystemParams& params, const ChannelRealization& chan,
                        DibfCase dibf, MaScheme ma, const AoConfig& cfg) {
  if (ma == MaScheme::Noma) return solve_noma(params, chan, cfg, dibf);
  switch (dibf) {
    case DibfCase::Case1: return solve_case1_tdma(params, chan, cfg);
    case DibfCase::Case2: return solve_case2_tdma(params, chan, cfg);
    case DibfCase::Case3: return solve_case3_tdma(params, chan, cfg);
  }
  throw std::invalid_argument("bad case");
}

ChainReport verify_chain(const SystemParams& params, const ChannelRealization& chan,
                         const AoConfig& cfg, double eq_tol, double ineq_slack) {
  ChainReport rep;
  const Solution c1 = solve_case1_tdma(params, chan, cfg);
  BeamSet warm2 = c1.beams;
  warm2.v1 = {c1.beams.v0};
  const Solution c2 = solve_case2_tdma(params, chan, cfg, &warm2);
  const Solution c3 = solve_case3_tdma(params, chan, cfg, &c2.beams);
  const Solution n1 = noma_from_tdma(params, chan, c1);
  const Solution n2 = noma_from_tdma(params, chan, c2);
  const Solution n3 = noma_case3_from_case2(params, chan, n2);

  rep.tdma_c1 = c1.objective_bits;
  rep.tdma_c2 = c2.objective_bits;
  rep.tdma_c3 = c3.objective_bits;
  rep.noma_c1 = n1.objective_bits;
  rep.noma_c2 = n2.objective_bits;
  rep.noma_c3 = n3.objective_bits;

  const double scale = std::max({rep.tdma_c3, rep.tdma_c2, 1e-12});
  auto rel_gap = [&](double a, double b) { return std::abs(a - b) / scale; };
  rep.worst_equality_gap = std::max({rel_gap(rep.tdma_c1, rep.noma_c1),
                                     rel_gap(rep.tdma_c2, rep.noma_c2),
                                     rel_gap(rep.noma_c2, rep.noma_c3)});
  const double m1 = (rep.tdma_c2 - rep.tdma_c1) / scale;
  const double m2 = (rep.tdma_c3 - rep.tdma_c2) / scale;
  const double m3 = (rep.noma_c2 - rep.noma_c1) / scale;
  rep.worst_inequality_slack = std::min({m1, m2, m3});
  rep.ok = rep.worst_equality_gap <= eq_tol &&
           rep.worst_inequality_slack >= -ineq_slack;
  return rep;
}

} // namespace wpmec
