// SPDX-License-Identifier: Apache-2.0
#include "wpmec/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wpmec {

namespace {

void check_index(const ChannelRealization& chan, int k) {
  if (k < 0 || k >= chan.num_devices())
    throw std::out_of_range("device index out of range");
}

const BeamVector& slot_beam(const BeamSet& beams, DibfCase dibf, int slot, int K) {
  switch (dibf) {
    case DibfCase::Case1:
      return beams.v0;
    case DibfCase::Case2:
      if (beams.v1.size() != 1)
        throw std::invalid_argument("Case 2 requires exactly one offload beam");
      return beams.v1[0];
    case DibfCase::Case3:
      if (static_cast<int>(beams.v1.size()) < K)
        throw std::invalid_argument("Case 3 requires K offload beams");
      return beams.v1[static_cast<std::size_t>(slot)];
  }
  throw std::invalid_argument("bad case");
}

} // namespace

double equivalent_gain(const ChannelRealization& chan, const BeamVector& v, int k) {
  check_index(chan, k);
  Complex acc = std::conj(chan.h_direct[k]);
  const auto& q = chan.q_cascaded[k];
  if (v.entries.size() != q.size())
    throw std::invalid_argument("beam length does not match element count");
  for (Eigen::Index n = 0; n < q.size(); ++n)
    acc += std::conj(q[n]) * v.entries[n];
  return std::norm(acc);
}

double harvested_energy(const SystemParams& params, const ChannelRealization& chan,
                        const BeamVector& v0, double tau0, int k) {
  if (tau0 < 0) throw std::invalid_argument("tau0 must be nonnegative");
  return params.eh_efficiency * tau0 * params.hap_tx_power_w *
         equivalent_gain(chan, v0, k);
}

double offload_gain(const ChannelRealization& chan, const BeamSet& beams,
                    DibfCase dibf, int k, int slot) {
  check_index(chan, k);
  if (slot < 0) slot = k;
  return equivalent_gain(chan, slot_beam(beams, dibf, slot, chan.num_devices()), k);
}

double rate_term_bits(double bandwidth_hz, double tau, double e, double gain,
                      double sigma2) {
  if (tau <= 0.0 || e <= 0.0 || gain <= 0.0) return 0.0;
  return bandwidth_hz * tau * std::log2(1.0 + e * gain / (tau * sigma2));
}

double offload_rate_tdma(const SystemParams& params, const ChannelRealization& chan,
                         const BeamSet& beams, const ResourceAllocation& alloc,
                         DibfCase dibf) {
  const int K = chan.num_devices();
  if (static_cast<int>(alloc.tau1.size()) != K)
    throw std::invalid_argument("TDMA allocation needs K slots");
  double bits = 0;
  for (int k = 0; k < K; ++k) {
    const double g = offload_gain(chan, beams, dibf, k);
    bits += rate_term_bits(params.bandwidth_hz, alloc.tau1[k], alloc.energy[k], g,
                           params.noise_power_w);
  }
  return bits;
}

double offload_rate_noma(const SystemParams& params, const ChannelRealization& chan,
                         const BeamSet& beams, const ResourceAllocation& alloc,
                         DibfCase dibf) {
  const int K = chan.num_devices();
  if (alloc.tau1.empty()) throw std::invalid_argument("NOMA allocation needs a slot");
  const double sigma2 = params.noise_power_w;
  if (dibf != DibfCase::Case3) {
    const double tau1 = alloc.tau1[0];
    if (tau1 <= 0) return 0.0;
    double z = 0;  // sum_k e_k g_k
    for (int k = 0; k < K; ++k)
      z += alloc.energy[k] * offload_gain(chan, beams, dibf, k);
    if (z <= 0) return 0.0;
    return params.bandwidth_hz * tau1 * std::log2(1.0 + z / (tau1 * sigma2));
  }
  // Case 3: one slot per beam; device k's energy is spread over the whole
  // offload stage, each slot i seeing the gains under v_{1,i}.
  const int S = static_cast<int>(alloc.tau1.size());
  const double tau_total = std::accumulate(alloc.tau1.begin(), alloc.tau1.end(), 0.0);
  if (tau_total <= 0) return 0.0;
  double bits = 0;
  for (int i = 0; i < S; ++i) {
    const double ti = alloc.tau1[i];
    if (ti <= 0) continue;
    double z = 0;
    for (int k = 0; k < K; ++k) {
      const double p_k = alloc.energy[k] / tau_total;
      z += p_k * offload_gain(chan, beams, dibf, k, i);
    }
    bits += params.bandwidth_hz * ti * std::log2(1.0 + z / sigma2);
  }
  return bits;
}

double total_bits(const SystemParams& params, const ResourceAllocation& alloc,
                  double offload_bits) {
  double local = 0;
  for (double f : alloc.freq) local += params.frame_s * f / params.cycles_per_bit;
  return offload_bits + local;
}

double objective_bits(const SystemParams& params, const ChannelRealization& chan,
                      const BeamSet& beams, const ResourceAllocation& alloc,
                      DibfCase dibf, MaScheme ma) {
  const double off = ma == MaScheme::Tdma
                         ? offload_rate_tdma(params, chan, beams, alloc, dibf)
                         : offload_rate_noma(params, chan, beams, alloc, dibf);
  return total_bits(params, alloc, off);
}

FeasibilityReport check_feasibility(
    const SystemParams& params, const ChannelRealization& chan,
    const BeamSet& beams, const ResourceAllocation& alloc, DibfCase dibf,
    MaScheme ma, const std::optional<std::vector<double>>& qos_min_bits,
    double tol) {
  FeasibilityReport rep;
  const int K = chan.num_devices();
  auto add = [&](std::string name, double slack, double scale) {
    ConstraintSlack c;
    c.name = std::move(name);
    c.slack = slack;
    c.ok = slack >= -tol * scale;
    if (!c.ok) {
      rep.feasible = false;
      rep.worst_violation = std::max(rep.worst_violation, -slack);
    }
    rep.constraints.push_back(std::move(c));
  };

  // Energy causality: used energy (offload + local computing) vs harvested
  // under the WPT beam v0.
  for (int k = 0; k < K; ++k) {
    const double harvested = harvested_energy(params, chan, beams.v0, alloc.tau0, k);
    const double f = k < static_cast<int>(alloc.freq.size()) ? alloc.freq[k] : 0.0;
    const double e = k < static_cast<int>(alloc.energy.size()) ? alloc.energy[k] : 0.0;
    const double used = e + params.frame_s * params.cpu_energy_coeff * f * f * f;
    add("energy[" + std::to_string(k) + "]", harvested - used,
        std::max(harvested, 1e-12));
  }

  const double tau_sum = std::accumulate(alloc.tau1.begin(), alloc.tau1.end(), 0.0);
  add("time_budget", params.frame_s - alloc.tau0 - tau_sum, params.frame_s);

  double min_var = alloc.tau0;
  for (double t : alloc.tau1) min_var = std::min(min_var, t);
  for (double e : alloc.energy) min_var = std::min(min_var, e);
  for (double f : alloc.freq) min_var = std::min(min_var, f);
  for (double p : alloc.power) min_var = std::min(min_var, p);
  add("nonnegativity", min_var, 1.0);

  auto modulus_slack = [](const BeamVector& v) {
    double worst = 0;
    for (Eigen::Index n = 0; n < v.entries.size(); ++n) {
      const double m = std::abs(v.entries[n]);
      const double dev = v.mode == ModulusMode::UnitModulus ? std::abs(m - 1.0)
                                                            : std::max(0.0, m - 1.0);
      worst = std::max(worst, dev);
    }
    return -worst;
  };
  add("modulus_v0", modulus_slack(beams.v0), 1e-3);
  for (std::size_t i = 0; i < beams.v1.size(); ++i)
    add("modulus_v1[" + std::to_string(i) + "]", modulus_slack(beams.v1[i]), 1e-3);

  if (qos_min_bits) {
    // Per-device computed bits >= R_{k,min}; NOMA individual rates are out of
    // scope, so QoS slacks are reported for TDMA only.
    for (int k = 0; k < K && ma == MaScheme::Tdma; ++k) {
      const double g = offload_gain(chan, beams, dibf, k);
      const double bits =
          rate_term_bits(params.bandwidth_hz, alloc.tau1[k], alloc.energy[k], g,
                         params.noise_power_w) +
          params.frame_s * alloc.freq[k] / params.cycles_per_bit;
      add("qos[" + std::to_string(k) + "]", bits - (*qos_min_bits)[k],
          std::max(1.0, (*qos_min_bits)[k]));
    }
  }
  return rep;
}

} // namespace wpmec
