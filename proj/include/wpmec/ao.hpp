// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/channel.hpp"
#include "wpmec/irs_bf.hpp"
#include "wpmec/resource_alloc.hpp"
#include "wpmec/types.hpp"

#include <cstdint>
#include <optional>

namespace wpmec {

struct AoConfig {
  double epsilon_xi = 1e-4;   // stop when the fractional increase drops below
  int max_iters = 50;
  int restarts = 3;           // random-phase restarts on top of the default start
  bool record_trace = true;
  std::uint64_t seed = 1;     // restart phase RNG
  BfOptions bf;
  // Allocation pins, forwarded into every allocation subproblem (benchmark
  // schemes and QoS-constrained runs).
  std::optional<double> fixed_tau0;
  std::optional<std::vector<double>> qos_min_bits;
  bool forbid_offload = false;
  bool forbid_local = false;
};

/// Alternating optimization at a fixed channel: resource allocation at fixed
/// beams, beam update at the fixed allocation, repeated until the fractional
/// objective increase falls below epsilon_xi; beams are then projected to
/// unit modulus and the allocation re-solved. Best over restarts wins; the
/// unit-modulus starting point itself is kept as a candidate, so a warm start
/// can never be lost. `warm` optionally seeds the first start.
Solution solve_case1_tdma(const SystemParams& params, const ChannelRealization& chan,
                          const AoConfig& cfg = {}, const BeamSet* warm = nullptr);
Solution solve_case2_tdma(const SystemParams& params, const ChannelRealization& chan,
                          const AoConfig& cfg = {}, const BeamSet* warm = nullptr);
Solution solve_case3_tdma(const SystemParams& params, const ChannelRealization& chan,
                          const AoConfig& cfg = {}, const BeamSet* warm = nullptr);

/// NOMA solutions: Cases 1/2 run the TDMA driver and apply the slot-collapsing
/// map (which preserves the objective at equal-SNR optima); Case 3 duplicates
/// the Case-2 beam across slots, which is optimal for the NOMA sum rate.
Solution solve_noma(const SystemParams& params, const ChannelRealization& chan,
                    const AoConfig& cfg, DibfCase dibf);

/// Dispatch by (case, ma).
Solution solve_instance(const SystemParams& params, const ChannelRealization& chan,
                        DibfCase dibf, MaScheme ma, const AoConfig& cfg = {});

struct ChainReport {
  double tdma_c1 = 0, tdma_c2 = 0, tdma_c3 = 0;
  double noma_c1 = 0, noma_c2 = 0, noma_c3 = 0;
  double worst_equality_gap = 0;    // relative
  double worst_inequality_slack = 0;  // most negative relative margin
  bool ok = false;
};

/// Solves all six case/MA combinations with shared warm starts and checks
/// R_TDMA^c1 = R_NOMA^c1 <= R_TDMA^c2 = R_NOMA^c2 = R_NOMA^c3 <= R_TDMA^c3.
ChainReport verify_chain(const SystemParams& params, const ChannelRealization& chan,
                         const AoConfig& cfg = {}, double eq_tol = 1e-6,
                         double ineq_slack = 1e-6);

/// Default deterministic start: aligned phases for the device with the
/// strongest cascaded channel.
BeamVector default_start_beam(const ChannelRealization& chan);

} // namespace wpmec
