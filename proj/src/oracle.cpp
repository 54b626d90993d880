// SPDX-License-Identifier: Apache-2.0
#include "wpmec/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace wpmec {

namespace {

struct Box {
  double lo = 0, hi = 1;
};

// Multi-round grid search over [0,1]^d boxes. The running best is carried
// across rounds (monotone improvement); ties keep the lexicographically
// first grid point because only strict improvement replaces the incumbent.
struct GridSearch {
  int points;
  int rounds;

  template <class F>
  double run(int dims, const F& eval, double* slack_out) const {
    std::vector<Box> box(dims);
    std::vector<double> best_u(dims, 0.0), u(dims, 0.0);
    double best = eval(best_u);
    const int g = std::max(3, points);

    for (int round = 0; round < std::max(1, rounds); ++round) {
      std::vector<int> idx(dims, 0);
      for (;;) {
        for (int d = 0; d < dims; ++d)
          u[d] = box[d].lo + (box[d].hi - box[d].lo) * idx[d] / (g - 1);
        const double v = eval(u);
        if (v > best) {
          best = v;
          best_u = u;
        }
        int d = dims - 1;
        while (d >= 0 && ++idx[d] == g) idx[d--] = 0;
        if (d < 0) break;
      }
      // Shrink every axis to one cell width around the incumbent.
      for (int d = 0; d < dims; ++d) {
        const double step = (box[d].hi - box[d].lo) / (g - 1);
        box[d].lo = std::max(0.0, best_u[d] - step);
        box[d].hi = std::min(1.0, best_u[d] + step);
      }
    }

    if (slack_out) {
      double slack = 0;
      for (int d = 0; d < dims; ++d) {
        const double step = (box[d].hi - box[d].lo) / (g - 1);
        for (double s : {-step, step}) {
          std::vector<double> up = best_u;
          up[d] = std::clamp(up[d] + s, 0.0, 1.0);
          slack = std::max(slack, (best - eval(up)) / 2.0);
        }
      }
      *slack_out = slack * dims;
    }
    return best;
  }
};

// Allocation decoded from unit-box coordinates: tau0 fraction, stick-breaking
// time splits over `slots` slots, and per-device energy split x_k between
// offloading (e = x*cap) and local computing.
struct AllocPoint {
  double tau0 = 0;
  std::vector<double> tau;  // per slot
  std::vector<double> e, f;
  bool ok = true;
};

struct AllocDecoder {
  const SystemParams* pr;
  std::vector<double> gain_wpt;
  std::optional<std::vector<double>> fixed_freq;
  bool forbid_offload = false, forbid_local = false;
  int slots = 1;

  int K() const { return static_cast<int>(gain_wpt.size()); }
  int dims() const {
    return 1 + std::max(0, slots - 1) + (forbid_offload || forbid_local ? 0 : K());
  }

  AllocPoint decode(const std::vector<double>& u) const {
    AllocPoint a;
    const double T = pr->frame_s;
    const double epe = pr->eh_efficiency * pr->hap_tx_power_w;
    a.tau0 = u[0] * T;
    double rest = T - a.tau0;
    a.tau.assign(slots, 0.0);
    int j = 1;
    for (int s = 0; s < slots - 1; ++s) {
      a.tau[s] = u[j++] * rest;
      rest -= a.tau[s];
    }
    a.tau[slots - 1] = rest;
    a.e.assign(K(), 0.0);
    a.f.assign(K(), 0.0);
    for (int k = 0; k < K(); ++k) {
      double cap = a.tau0 * epe * gain_wpt[k];
      if (fixed_freq) {
        a.f[k] = (*fixed_freq)[k];
        cap -= T * pr->cpu_energy_coeff * std::pow(a.f[k], 3);
        if (cap < 0) {
          a.ok = false;
          return a;
        }
        const double x = forbid_offload ? 0.0 : (forbid_local ? 1.0 : u[j++]);
        a.e[k] = x * cap;
      } else {
        const double x = forbid_offload ? 0.0 : (forbid_local ? 1.0 : u[j++]);
        a.e[k] = x * cap;
        a.f[k] = std::cbrt((1.0 - x) * cap / (T * pr->cpu_energy_coeff));
        if (forbid_local) a.f[k] = 0.0;
      }
    }
    return a;
  }
};

double safe_rate(double B, double tau, double e, double g, double s2) {
  if (tau <= 0 || e <= 0 || g <= 0) return 0;
  return B * tau * std::log2(1.0 + e * g / (tau * s2));
}

double local_bits(const SystemParams& pr, const std::vector<double>& f) {
  double b = 0;
  for (double fk : f) b += pr.frame_s * fk / pr.cycles_per_bit;
  return b;
}

// gain_off is per (device, slot); TDMA uses slot k for device k, NOMA uses
// shared slots with energy spread over the whole offloading stage.
double alloc_bits(const SystemParams& pr, const AllocPoint& a, MaScheme ma,
                  const std::vector<std::vector<double>>& gain_off) {
  if (!a.ok) return -1.0;
  const int K = static_cast<int>(a.e.size());
  const int S = static_cast<int>(a.tau.size());
  double bits = local_bits(pr, a.f);
  if (ma == MaScheme::Tdma) {
    for (int k = 0; k < K; ++k)
      bits += safe_rate(pr.bandwidth_hz, a.tau[k], a.e[k], gain_off[k][k],
                        pr.noise_power_w);
  } else {
    const double tau_total =
        std::accumulate(a.tau.begin(), a.tau.end(), 0.0);
    if (tau_total > 0) {
      for (int i = 0; i < S; ++i) {
        if (a.tau[i] <= 0) continue;
        double z = 0;
        for (int k = 0; k < K; ++k)
          z += a.e[k] / tau_total * gain_off[k][i];
        if (z > 0)
          bits += pr.bandwidth_hz * a.tau[i] *
                  std::log2(1.0 + z / pr.noise_power_w);
      }
    }
  }
  return bits;
}

// Pareto-maximal frontier of gain tuples; lossless for objectives that are
// nondecreasing in every coordinate.
std::vector<std::vector<double>> pareto_frontier(
    std::vector<std::vector<double>> pts) {
  if (pts.empty()) return pts;
  const std::size_t K = pts[0].size();
  if (K == 1) {
    auto it = std::max_element(pts.begin(), pts.end());
    return {*it};
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    if (a[0] != b[0]) return a[0] > b[0];
    return a[1] > b[1];
  });
  std::vector<std::vector<double>> out;
  double best2 = -1;
  for (auto& p : pts) {
    if (p[1] > best2) {
      best2 = p[1];
      out.push_back(p);
    }
  }
  return out;
}

std::vector<std::vector<double>> enumerate_gain_tuples(
    const SystemParams& params, const ChannelRealization& chan, int levels) {
  const int N = params.num_elements;
  const int K = chan.num_devices();
  std::vector<std::vector<double>> tuples;
  std::vector<int> idx(N, 0);
  const double step = 2.0 * std::numbers::pi / levels;
  for (;;) {
    std::vector<double> t(K);
    for (int k = 0; k < K; ++k) {
      Complex acc = std::conj(chan.h_direct[k]);
      for (int n = 0; n < N; ++n)
        acc += std::conj(chan.q_cascaded[k][n]) * std::polar(1.0, idx[n] * step);
      t[k] = std::norm(acc);
    }
    tuples.push_back(std::move(t));
    if (N == 0) break;
    int d = N - 1;
    while (d >= 0 && ++idx[d] == levels) idx[d--] = 0;
    if (d < 0) break;
  }
  return tuples;
}

} // namespace

OracleValue grid_refine_ra(const RaProblem& problem, const OracleConfig& cfg) {
  const auto& pr = *problem.params;
  const int K = problem.num_devices();
  AllocDecoder dec;
  dec.pr = &pr;
  dec.gain_wpt = problem.gain_wpt;
  dec.fixed_freq = problem.fixed_freq;
  dec.forbid_offload = problem.forbid_offload;
  dec.forbid_local = problem.forbid_local;
  dec.slots = problem.ma == MaScheme::Tdma ? K : 1;
  if (problem.fixed_tau0)
    throw std::invalid_argument("grid oracle does not support pinned tau0");
  if (dec.dims() > 7) throw std::invalid_argument("instance too large for oracle");

  std::vector<std::vector<double>> goff(K, std::vector<double>(dec.slots, 0.0));
  for (int k = 0; k < K; ++k)
    for (int s = 0; s < dec.slots; ++s) goff[k][s] = problem.gain_off[k];

  GridSearch gs{cfg.grid_points, cfg.refine_rounds};
  OracleValue v;
  v.bits = gs.run(dec.dims(),
                  [&](const std::vector<double>& u) {
                    return alloc_bits(pr, dec.decode(u), problem.ma, goff);
                  },
                  &v.slack);
  return v;
}

OracleValue brute_force_rate(const SystemParams& params,
                             const ChannelRealization& chan, DibfCase dibf,
                             MaScheme ma, const OracleConfig& cfg) {
  const int N = params.num_elements;
  const int K = chan.num_devices();
  if (N > 3 || K > 2)
    throw std::invalid_argument("brute-force oracle is limited to N <= 3, K <= 2");
  if (cfg.phase_levels < 2) throw std::invalid_argument("phase_levels >= 2");

  const auto tuples = enumerate_gain_tuples(params, chan, cfg.phase_levels);
  const auto frontier = pareto_frontier(tuples);

  // Per-device maximum gain (Case-3 per-slot beams decouple across devices).
  std::vector<double> gmax(K, 0.0);
  for (const auto& t : tuples)
    for (int k = 0; k < K; ++k) gmax[k] = std::max(gmax[k], t[k]);

  AllocDecoder dec;
  dec.pr = &params;
  dec.slots = ma == MaScheme::Tdma ? K : 1;
  const int S = dec.slots;

  // A combo is a WPT frontier tuple plus offloading gains per slot:
  // pick = -1 encodes "per-device maximum" (Case-3 TDMA), pick = -2 encodes
  // "reuse the WPT tuple" (Case 1); otherwise an index into the frontier.
  struct Combo {
    int ih = 0;
    std::array<int, 4> pick{};
    int npick = 0;
    double ub = 0;
    std::size_t order = 0;
  };

  auto slot_gain = [&](const Combo& c, int k, int s) {
    const int p = c.pick[std::min(s, c.npick - 1)];
    if (p == -1) return gmax[k];
    if (p == -2) return frontier[c.ih][k];
    return frontier[static_cast<std::size_t>(p)][k];
  };

  // Sound objective upper bound, nondecreasing in every gain. For tau0 in
  // [a,b]: e_k <= b*eta*P_E*h_k, every offload slot <= T-a, f_k^3 <=
  // b*eta*P_E*h_k/(T*gamma_c); maximize the resulting bound over a tau0
  // partition. Per-device rate terms are bounded independently
  // (log(1+x+y) <= log(1+x) + log(1+y)).
  const double epe = params.eh_efficiency * params.hap_tx_power_w;
  const double T = params.frame_s;
  auto upper_bound = [&](const Combo& c) {
    constexpr int M = 16;
    double ub = 0;
    for (int m = 0; m < M; ++m) {
      const double a = T * m / M, b = T * (m + 1) / M;
      double u = 0;
      for (int k = 0; k < K; ++k) {
        const double h = frontier[c.ih][k];
        double gbar = 0;
        for (int s = 0; s < S; ++s) gbar = std::max(gbar, slot_gain(c, k, s));
        const double emax = b * epe * h;
        if (T - a > 0 && emax * gbar > 0)
          u += params.bandwidth_hz * (T - a) *
               std::log2(1.0 + emax * gbar / ((T - a) * params.noise_power_w));
        u += T * std::cbrt(emax / (T * params.cpu_energy_coeff)) /
             params.cycles_per_bit;
      }
      ub = std::max(ub, u);
    }
    return ub;
  };

  std::vector<Combo> combos;
  const int F = static_cast<int>(frontier.size());
  switch (dibf) {
    case DibfCase::Case1:
      for (int i = 0; i < F; ++i) combos.push_back({i, {-2}, 1, 0, 0});
      break;
    case DibfCase::Case2:
      for (int i = 0; i < F; ++i)
        for (int j = 0; j < F; ++j) combos.push_back({i, {j}, 1, 0, 0});
      break;
    case DibfCase::Case3:
      if (ma == MaScheme::Tdma) {
        for (int i = 0; i < F; ++i) combos.push_back({i, {-1}, 1, 0, 0});
      } else {
        // With energies spread over the whole offloading stage, the sum rate
        // is linear in the slot durations at any fixed total, so all the
        // offload time concentrates on the single best slot beam: distinct
        // per-slot beams cannot beat one shared beam within this family.
        // Enumerating shared beams is therefore exhaustive here.
        for (int i = 0; i < F; ++i)
          for (int j = 0; j < F; ++j) combos.push_back({i, {j}, 1, 0, 0});
      }
      break;
  }
  for (std::size_t i = 0; i < combos.size(); ++i) {
    combos[i].order = i;
    combos[i].ub = upper_bound(combos[i]);
  }
  // Most promising first; ties keep enumeration order for determinism.
  std::sort(combos.begin(), combos.end(), [](const Combo& a, const Combo& b) {
    if (a.ub != b.ub) return a.ub > b.ub;
    return a.order < b.order;
  });

  GridSearch gs{cfg.grid_points, cfg.refine_rounds};
  OracleValue best;
  best.bits = -1;
  std::vector<std::vector<double>> goff(K, std::vector<double>(S));
  for (const Combo& c : combos) {
    if (c.ub <= best.bits) break;  // nothing below can improve
    for (int k = 0; k < K; ++k)
      for (int s = 0; s < S; ++s) goff[k][s] = slot_gain(c, k, s);
    dec.gain_wpt = frontier[c.ih];
    double slack = 0;
    const double bits = gs.run(dec.dims(),
                               [&](const std::vector<double>& u) {
                                 return alloc_bits(params, dec.decode(u), ma, goff);
                               },
                               &slack);
    if (bits > best.bits) {
      best.bits = bits;
      best.slack = slack;
    }
  }
  if (best.bits < 0) best.bits = 0;
  return best;
}

} // namespace wpmec
