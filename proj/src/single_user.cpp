// SPDX-License-Identifier: Apache-2.0
#include "wpmec/single_user.hpp"

#include "wpmec/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wpmec {

namespace {
constexpr double kLn2 = std::numbers::ln2;
constexpr double kRootTol = 1e-10;
constexpr int kMaxDoublings = 200;
constexpr int kBisectDepth = 200;
} // namespace

BeamVector optimal_single_user_beam(const ChannelRealization& chan, int k) {
  if (k < 0 || k >= chan.num_devices())
    throw std::out_of_range("device index out of range");
  const auto& q = chan.q_cascaded[k];
  BeamVector v;
  v.mode = ModulusMode::UnitModulus;
  v.entries = CVec(q.size());
  const double base = std::arg(std::conj(chan.h_direct[k]));
  for (Eigen::Index n = 0; n < q.size(); ++n) {
    const double phase = base + std::arg(q[n]);
    v.entries[n] = Complex(std::cos(phase), std::sin(phase));
  }
  return v;
}

namespace {

double g_residual(const SystemParams& pr, double p, double h) {
  const double s2 = pr.noise_power_w;
  const double denom = (s2 + p * h) * kLn2;
  return std::log2(1.0 + p * h / s2) - p * h / denom -
         pr.eh_efficiency * pr.hap_tx_power_w * h * h / denom;
}

} // namespace

double solve_p_star(const SystemParams& params, double h) {
  if (!(h > 0)) throw std::invalid_argument("gain must be positive");
  // G(0,h) < 0 and G is strictly increasing in p.
  double lo = 0.0;
  double hi = params.noise_power_w / h;  // start near SNR ~ 1
  int grow = 0;
  while (g_residual(params, hi, h) < 0) {
    lo = hi;
    hi *= 2.0;
    if (++grow > kMaxDoublings)
      throw std::runtime_error("solve_p_star: bracket growth failed (pathological params)");
  }
  for (int i = 0; i < kBisectDepth; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double r = g_residual(params, mid, h);
    if (std::abs(r) <= kRootTol) return mid;
    (r < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double activation_threshold(const SystemParams& params, double h) {
  const double p = solve_p_star(params, h);
  const double s2 = params.noise_power_w;
  const double gc = params.cpu_energy_coeff;
  const double inner = (s2 + p * h) * kLn2 /
                       (3.0 * params.cycles_per_bit * h * gc * params.bandwidth_hz);
  return gc / (params.eh_efficiency * h) * std::pow(inner, 1.5);
}

double los_gain(const SystemParams& params, int num_elements) {
  if (params.device_positions.empty())
    throw std::invalid_argument("los_gain needs a device position");
  const double d_ad = distance(params.hap_pos, params.device_positions[0]);
  const double d_ai = distance(params.hap_pos, params.irs_pos);
  const double d_id = distance(params.irs_pos, params.device_positions[0]);
  const double beta = params.ref_gain;
  const double boost = 1.0 + num_elements *
                                 std::sqrt(std::pow(d_ad, params.pathloss_exp_ad) *
                                           std::pow(d_ai, -params.pathloss_exp_ai)) *
                                 std::sqrt(beta * std::pow(d_id, -params.pathloss_exp_id));
  return beta * std::pow(d_ad, -params.pathloss_exp_ad) * boost * boost;
}

ActivationAnalysis analyze_single_user(const SystemParams& params, double h) {
  if (!(h > 0)) throw std::invalid_argument("gain must be positive");
  ActivationAnalysis a;
  a.gain_h = h;
  a.p_star = solve_p_star(params, h);
  a.threshold_w = activation_threshold(params, h);
  a.activated = params.hap_tx_power_w > a.threshold_w;

  const double s2 = params.noise_power_w;
  const double gc = params.cpu_energy_coeff;
  const double T = params.frame_s;
  const double epe_h = params.eh_efficiency * params.hap_tx_power_w * h;

  if (!a.activated) {
    // All time to WPT, all energy to local computing:
    // T gc f^3 <= tau0 eta P_E h with tau0 = T.
    a.tau1_opt = 0;
    a.f_star = std::cbrt(epe_h / gc);
    return a;
  }
  a.f_star = std::sqrt((s2 + a.p_star * h) * kLn2 /
                       (3.0 * params.cycles_per_bit * h * gc * params.bandwidth_hz));
  const double f3 = a.f_star * a.f_star * a.f_star;
  a.tau1_opt = (epe_h - gc * f3) / (a.p_star + epe_h) * T;
  return a;
}

Solution solve_single_user_gain(const SystemParams& params, double h) {
  const ActivationAnalysis a = analyze_single_user(params, h);
  const double T = params.frame_s;

  Solution sol;
  sol.ma = MaScheme::Tdma;
  sol.dibf = DibfCase::Case2;
  sol.alloc.tau1 = {a.tau1_opt};
  sol.alloc.tau0 = T - a.tau1_opt;
  sol.alloc.freq = {a.f_star};
  if (a.activated) {
    sol.alloc.energy = {a.tau1_opt * a.p_star};
    sol.alloc.power = {a.p_star};
    sol.offload_active = {0};
  } else {
    sol.alloc.energy = {0.0};
    sol.alloc.power = {0.0};
  }
  const double off = rate_term_bits(params.bandwidth_hz, sol.alloc.tau1[0],
                                    sol.alloc.energy[0], h, params.noise_power_w);
  sol.objective_bits = total_bits(params, sol.alloc, off);
  return sol;
}

Solution solve_single_user(const SystemParams& params, const ChannelRealization& chan) {
  if (chan.num_devices() != 1)
    throw std::invalid_argument("solve_single_user requires K = 1");
  const BeamVector v = optimal_single_user_beam(chan, 0);
  const double h = equivalent_gain(chan, v, 0);
  Solution sol = solve_single_user_gain(params, h);
  sol.beams.v0 = v;
  sol.beams.v1 = {v};
  return sol;
}

} // namespace wpmec
