// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/channel.hpp"
#include "wpmec/resource_alloc.hpp"
#include "wpmec/types.hpp"

namespace wpmec {

/// Brute-force search configuration for tiny instances.
struct OracleConfig {
  int phase_levels = 16;  // quantization of each IRS phase
  int grid_points = 9;    // points per allocation axis and round
  int refine_rounds = 3;
};

struct OracleValue {
  double bits = 0;
  double slack = 0;  // propagated allocation-grid half-cell slack at the argmax
};

/// Exhaustive quantized-phase beam enumeration (reduced to the Pareto
/// frontier of per-device gain tuples, which is lossless because the
/// objective is nondecreasing in every gain) with a nested refined grid
/// search over the allocation. Valid lower bound on the true optimum; fully
/// independent of the interior-point solver. Guarded to N <= 3, K <= 2.
OracleValue brute_force_rate(const SystemParams& params,
                             const ChannelRealization& chan, DibfCase dibf,
                             MaScheme ma, const OracleConfig& cfg = {});

/// Grid-refinement oracle for the allocation subproblem alone (fixed gains).
/// Multi-round coordinate grid with monotone improvement per round;
/// lexicographically first grid point wins ties.
OracleValue grid_refine_ra(const RaProblem& problem, const OracleConfig& cfg = {});

} // namespace wpmec
