// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/channel.hpp"
#include "wpmec/types.hpp"

#include <optional>

namespace wpmec {

// Pure evaluators for the harvest-then-offload frame. All throw
// std::out_of_range on a bad device index and std::invalid_argument when the
// beam set does not match the requested case.

/// |h_d,k^H + q_k^H v|^2.
double equivalent_gain(const ChannelRealization& chan, const BeamVector& v, int k);

/// eta * tau0 * P_E * |h_d,k^H + q_k^H v0|^2, joules.
double harvested_energy(const SystemParams& params, const ChannelRealization& chan,
                        const BeamVector& v0, double tau0, int k);

/// Per-slot offloading gain of device k under the case's beam choice.
/// `slot` selects the Case-3 beam (ignored otherwise; defaults to k).
double offload_gain(const ChannelRealization& chan, const BeamSet& beams,
                    DibfCase dibf, int k, int slot = -1);

/// Single perspective-form rate term B * tau * log2(1 + e*g/(tau*sigma2)),
/// continuously extended to 0 at tau = 0 (and at e = 0).
double rate_term_bits(double bandwidth_hz, double tau, double e, double gain,
                      double sigma2);

/// TDMA offloading sum over K slots (Case 3 needs K beam vectors).
double offload_rate_tdma(const SystemParams& params, const ChannelRealization& chan,
                         const BeamSet& beams, const ResourceAllocation& alloc,
                         DibfCase dibf);

/// NOMA sum-rate; Case 1/2 use the single shared slot, Case 3 sums per-slot
/// terms each with its own beam.
double offload_rate_noma(const SystemParams& params, const ChannelRealization& chan,
                         const BeamSet& beams, const ResourceAllocation& alloc,
                         DibfCase dibf);

/// offload_bits + sum_k T f_k / C.
double total_bits(const SystemParams& params, const ResourceAllocation& alloc,
                  double offload_bits);

double objective_bits(const SystemParams& params, const ChannelRealization& chan,
                      const BeamSet& beams, const ResourceAllocation& alloc,
                      DibfCase dibf, MaScheme ma);

struct ConstraintSlack {
  std::string name;
  double slack = 0;   // >= -tol means satisfied
  bool ok = true;
};

struct FeasibilityReport {
  std::vector<ConstraintSlack> constraints;
  bool feasible = true;
  double worst_violation = 0;
};

/// Evaluates energy causality per device (with the case's WPT gain), the time
/// budget, nonnegativity, beam modulus constraints, and optional per-device
/// minimum computed bits.
FeasibilityReport check_feasibility(
    const SystemParams& params, const ChannelRealization& chan,
    const BeamSet& beams, const ResourceAllocation& alloc, DibfCase dibf,
    MaScheme ma, const std::optional<std::vector<double>>& qos_min_bits = {},
    double tol = 1e-9);

} // namespace wpmec
