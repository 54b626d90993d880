// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/channel.hpp"
#include "wpmec/types.hpp"

namespace wpmec {

/// Result of the single-user activation analysis at equivalent gain h.
struct ActivationAnalysis {
  double gain_h = 0;       // |h_d^H + q^H v*|^2
  double p_star = 0;       // W
  double f_star = 0;       // cycles/s
  double threshold_w = 0;  // thre(h), W
  bool activated = false;  // P_E > thre(h)
  double tau1_opt = 0;     // s
};

/// Fully aligned single-user beam: entry n carries phase
/// arg(h_d^H) + arg(q_n), so direct and cascaded paths add coherently.
BeamVector optimal_single_user_beam(const ChannelRealization& chan, int k = 0);

/// Root of G(p,h) = log2(1+ph/s2) - ph/((s2+ph)ln2) - eta*P_E*h^2/((s2+ph)ln2),
/// found by bisection after geometric bracket growth (G is increasing in p).
/// Throws std::runtime_error if no bracket is found within 200 doublings.
double solve_p_star(const SystemParams& params, double h);

/// thre(h) = gamma_c/(eta h) * ((s2 + p* h) ln2 / (3 C h gamma_c B))^{3/2}.
double activation_threshold(const SystemParams& params, double h);

/// Pure-LoS equivalent gain with the aligned beam:
/// beta d_AD^-a (1 + N sqrt(d_AD^a d_AI^-a') sqrt(beta d_ID^-a''))^2.
/// Uses the first device position.
double los_gain(const SystemParams& params, int num_elements);

/// Closed-form optimum of the single-user problem at equivalent gain h
/// (both WPT and offload links aligned). Below threshold the device spends
/// the whole frame harvesting and computes locally at the energy-constrained
/// maximum frequency.
ActivationAnalysis analyze_single_user(const SystemParams& params, double h);

/// Full Solution (K must be 1); beam chosen by optimal_single_user_beam.
Solution solve_single_user(const SystemParams& params, const ChannelRealization& chan);

/// Same closed form against an externally supplied gain.
Solution solve_single_user_gain(const SystemParams& params, double h);

} // namespace wpmec
