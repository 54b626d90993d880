// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wpmec/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace wpmec {

/// One draw of all links. q_cascaded[k][n] = conj(h_irs_device[k][n]) * g[n],
/// so that the effective gain toward device k under beam v is
/// |h_direct[k]^H + q_k^H v|^2.
struct ChannelRealization {
  std::vector<Complex> h_direct;            // K
  CVec g_hap_irs;                           // N
  std::vector<CVec> h_irs_device;           // K x N
  std::vector<CVec> q_cascaded;             // K x N (derived)
  std::uint64_t seed = 0;

  int num_devices() const { return static_cast<int>(h_direct.size()); }
  int num_elements() const { return static_cast<int>(g_hap_irs.size()); }
};

/// Rician small-scale fading on all links over deterministic geometry-based
/// LoS phases (uniform linear array along x with half-wavelength spacing;
/// element n of a link arriving from unit direction d carries phase
/// pi * n * d.x). Randomness comes from mt19937_64 seeded with `seed` and an
/// explicit Box-Muller transform, so realizations are bit-reproducible across
/// platforms. Draw order: K direct links, then the HAP-IRS vector, then the
/// K IRS-device vectors.
ChannelRealization generate_channels(const SystemParams& params, std::uint64_t seed);

/// Recomputes q_cascaded from the stored per-link vectors (invariant check).
std::vector<CVec> recompute_cascaded(const ChannelRealization& chan);

// JSON fixture format (schema_version 1): complex numbers as [re, im] pairs.
std::string channel_to_json(const ChannelRealization& chan);
ChannelRealization channel_from_json(const std::string& text);
void save_channel(const ChannelRealization& chan, const std::string& path);
ChannelRealization load_channel(const std::string& path);

} // namespace wpmec
