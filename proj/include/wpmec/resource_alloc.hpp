// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/channel.hpp"
#include "wpmec/model.hpp"
#include "wpmec/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wpmec {

/// Convex resource-allocation subproblem at fixed beams, in the e = tau*p
/// substitution. gains are the equivalent channel power gains per device for
/// the WPT and offloading links.
struct RaProblem {
  const SystemParams* params = nullptr;
  std::vector<double> gain_wpt;   // h_k^wpt
  std::vector<double> gain_off;   // g_k^off
  MaScheme ma = MaScheme::Tdma;
  std::optional<std::vector<double>> fixed_freq;   // pins f_k
  std::optional<std::vector<double>> qos_min_bits; // R_{k,min}
  std::optional<double> fixed_tau0;                // pins tau0
  bool forbid_offload = false;  // local-computing-only benchmark
  bool forbid_local = false;    // offloading-only benchmark

  int num_devices() const { return static_cast<int>(gain_wpt.size()); }
};

struct RaResult {
  ResourceAllocation alloc;
  KktCertificate kkt;
  double objective_bits = 0;
  bool feasible = true;       // false on QoS infeasibility
  bool polished = false;      // structured KKT refinement accepted
  std::vector<int> offload_active;
  std::string message;
};

/// Interior-point solve of the subproblem; for the unconstrained-shape cases
/// the barrier solution is refined by Newton on the structural KKT system
/// (common SNR across offload-active devices), which drives the residual to
/// round-off. QoS infeasibility is detected by a phase-1 solve.
RaResult solve_ra(const RaProblem& problem);

/// Closed-form allocation with fixed CPU frequencies (TDMA): common SNR
/// Gamma* from the root of the increasing function H, then tau0 and tau_{1,k}
/// from the closed forms. Falls back to a zero-offloading allocation when H
/// has no positive root.
RaResult solve_ra_equal_snr(const RaProblem& problem);

/// Equivalence maps between TDMA and NOMA Case-1/2 solutions. Per-device
/// energies, frequencies, and beams are preserved; time slots are collapsed
/// (forward) or split so all devices share the TDMA SNR (reverse). Objective
/// equality holds at optimal (equal-SNR) inputs.
Solution noma_from_tdma(const SystemParams& params, const ChannelRealization& chan,
                        const Solution& tdma_solution);
Solution tdma_from_noma(const SystemParams& params, const ChannelRealization& chan,
                        const Solution& noma_solution);

/// Received SNR of device k at a TDMA allocation (0 if slot empty).
double snr_tdma(const RaProblem& problem, const ResourceAllocation& alloc, int k);

} // namespace wpmec
