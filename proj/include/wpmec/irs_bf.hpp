// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/channel.hpp"
#include "wpmec/types.hpp"

namespace wpmec {

/// State of the successive-convex-approximation beam search: the WPT beam,
/// the (common) offloading beam, and the per-device linearized gain bounds of
/// the last subproblem solve.
struct ScaState {
  BeamVector v0;
  BeamVector v1;               // tied to v0 under Case 1; unused under Case 3
  std::vector<double> slack_S; // active linearized-gain bound per device
  int iteration = 0;
};

/// Extended cascaded channel qbar_k = [q_k; h_{d,k}] so that the equivalent
/// gain is |qbar_k^H vbar|^2 with vbar = [v; 1].
CVec extended_channel(const ChannelRealization& chan, int k);
CVec extend_beam(const BeamVector& v);

/// Affine minorant of the convex quadratic |qbar^H vbar|^2, linearized at
/// vbar_anchor: 2 Re{(qbar^H vbar_anchor)^* (qbar^H vbar)} - |qbar^H vbar_anchor|^2.
/// Tangent at the anchor and a global lower bound.
double sca_lower_bound(const CVec& qbar, const CVec& vbar, const CVec& vbar_anchor);

/// Entry-wise phase projection; entries with modulus < 1e-12 become 1+0j.
BeamVector project_unit_modulus(const BeamVector& v);

/// Per-device fully aligned offloading beam: phase n = arg(h_{d,k}^H) +
/// arg([q_k]_n), achieving gain (|h_{d,k}| + sum_n |q_k[n]|)^2.
BeamVector case3_optimal_phases(const ChannelRealization& chan, int k);

struct BfOptions {
  int max_sca_iters = 20;
  double rel_tol = 1e-7;  // stop when the surrogate objective stalls
};

/// One beamforming update at a fixed allocation. Cases 1/2 maximize the
/// offloading rate over the relaxed-disk beam through the tangent minorants
/// (Case 1 additionally carries the linearized energy constraints and a
/// dual-weighted harvest term, since the single beam serves both stages);
/// Cases 2/3 then update the WPT beam by maximizing dual-weighted harvested
/// energy subject to covering each device's current consumption, which keeps
/// the incumbent allocation feasible. The returned state's true objective
/// (rate at the fixed allocation) never falls below the anchor's.
ScaState solve_bf_subproblem(const ScaState& state, const ResourceAllocation& alloc,
                             const SystemParams& params,
                             const ChannelRealization& chan, DibfCase dibf,
                             MaScheme ma, const BfOptions& opts = {});

} // namespace wpmec
