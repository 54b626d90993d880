// SPDX-License-Identifier: Apache-2.0
#include "wpmec/irs_bf.hpp"

#include "wpmec/barrier.hpp"
#include "wpmec/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wpmec {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kStartShrink = 1.0 - 1e-9;  // pull anchors off the disk boundary
constexpr double kEnergyRelax = 1e-6;        // Case-1 strict-interior margin

// Affine model of the gain minorant in the 2N real beam coordinates
// (v_n = x[2n] + i x[2n+1]): lin(x) = c0 + r.dot(x).
struct LinGain {
  double c0 = 0;
  Vec r;
};

Complex beam_response(const ChannelRealization& chan, int k, const CVec& v) {
  Complex acc = std::conj(chan.h_direct[k]);
  const auto& q = chan.q_cascaded[k];
  for (Eigen::Index n = 0; n < q.size(); ++n) acc += std::conj(q[n]) * v[n];
  return acc;
}

LinGain linearize_gain(const ChannelRealization& chan, int k, const CVec& anchor) {
  const auto& q = chan.q_cascaded[k];
  const int N = static_cast<int>(q.size());
  const Complex wa = beam_response(chan, k, anchor);
  LinGain lg;
  lg.r = Vec::Zero(2 * N);
  lg.c0 = 2.0 * std::real(std::conj(wa) * std::conj(chan.h_direct[k])) - std::norm(wa);
  for (int n = 0; n < N; ++n) {
    const Complex t = std::conj(wa) * std::conj(q[n]);
    lg.r[2 * n] = 2.0 * std::real(t);
    lg.r[2 * n + 1] = -2.0 * std::imag(t);
  }
  return lg;
}

CVec coords_to_beam(const Vec& x, int N) {
  CVec v(N);
  for (int n = 0; n < N; ++n) v[n] = Complex(x[2 * n], x[2 * n + 1]);
  return v;
}

Vec beam_to_coords(const CVec& v) {
  Vec x(2 * v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) {
    x[2 * n] = v[n].real();
    x[2 * n + 1] = v[n].imag();
  }
  return x;
}

void add_disk_constraints(ConvexProgram& prog, int N) {
  for (int n = 0; n < N; ++n) {
    prog.constraints.push_back([n](const Vec& x, Vec* g, Mat* h) {
      const double a = x[2 * n], b = x[2 * n + 1];
      if (g) {
        (*g)[2 * n] += 2.0 * a;
        (*g)[2 * n + 1] += 2.0 * b;
      }
      if (h) {
        (*h)(2 * n, 2 * n) += 2.0;
        (*h)(2 * n + 1, 2 * n + 1) += 2.0;
      }
      return a * a + b * b - 1.0;
    });
  }
}

double offload_rate_at(const SystemParams& params, const ChannelRealization& chan,
                       const ResourceAllocation& alloc, MaScheme ma, const CVec& v) {
  const int K = chan.num_devices();
  double bits = 0;
  if (ma == MaScheme::Tdma) {
    for (int k = 0; k < K; ++k)
      bits += rate_term_bits(params.bandwidth_hz, alloc.tau1[k], alloc.energy[k],
                             std::norm(beam_response(chan, k, v)),
                             params.noise_power_w);
  } else {
    const double tau1 = alloc.tau1[0];
    if (tau1 <= 0) return 0;
    double z = 0;
    for (int k = 0; k < K; ++k)
      z += alloc.energy[k] * std::norm(beam_response(chan, k, v));
    bits = rate_term_bits(params.bandwidth_hz, tau1, 1.0, z, params.noise_power_w);
  }
  return bits;
}

// Rate phase: maximize the offloading rate over the relaxed-disk beam via the
// tangent minorants. Under Case 1 the beam also powers WPT, so the linearized
// (slightly relaxed) energy constraints ride along and the objective carries a
// dual-weighted harvest term — the first-order value of extra energy to the
// follow-up allocation re-solve — so the shared beam can trade rate at the
// current allocation for harvest the re-solve will convert into more bits.
CVec rate_phase(const SystemParams& params, const ChannelRealization& chan,
                const ResourceAllocation& alloc, DibfCase dibf, MaScheme ma,
                const CVec& start, const BfOptions& opts,
                const std::vector<double>* harvest_w = nullptr) {
  const int K = chan.num_devices();
  const int N = static_cast<int>(start.size());
  const double s2 = params.noise_power_w;
  const double R0 = params.bandwidth_hz * params.frame_s;
  const double epe = params.eh_efficiency * params.hap_tx_power_w;

  std::vector<double> p(K, 0.0), tau(K, 0.0), use(K, 0.0);
  const double tau1_noma = ma == MaScheme::Noma ? alloc.tau1[0] : 0.0;
  for (int k = 0; k < K; ++k) {
    tau[k] = ma == MaScheme::Tdma ? alloc.tau1[k] : tau1_noma;
    if (tau[k] > 0 && alloc.energy[k] > 0) p[k] = alloc.energy[k] / tau[k];
    const double f = alloc.freq[k];
    use[k] = alloc.energy[k] +
             params.frame_s * params.cpu_energy_coeff * f * f * f;
  }

  auto value_at = [&](const CVec& v) {
    double val = offload_rate_at(params, chan, alloc, ma, v);
    if (harvest_w)
      for (int k = 0; k < K; ++k)
        val += (*harvest_w)[k] * alloc.tau0 * epe *
               std::norm(beam_response(chan, k, v));
    return val;
  };

  CVec cur = start;
  double cur_rate = value_at(cur);

  for (int it = 0; it < opts.max_sca_iters; ++it) {
    std::vector<LinGain> lin(K);
    std::vector<char> involved(K, 0);
    for (int k = 0; k < K; ++k) {
      lin[k] = linearize_gain(chan, k, cur);
      const double ga = std::norm(beam_response(chan, k, cur));
      involved[k] = p[k] > 0 && tau[k] > 0 && ga > 0;
    }

    ConvexProgram prog;
    if (ma == MaScheme::Tdma) {
      prog.objective = [&,K](const Vec& x, Vec* g, Mat* h) {
        double f0 = 0;
        for (int k = 0; k < K; ++k) {
          if (!involved[k]) continue;
          const double A = params.bandwidth_hz * tau[k] / (kLn2 * R0);
          const double z = 1.0 + p[k] * (lin[k].c0 + lin[k].r.dot(x)) / s2;
          f0 -= A * std::log(z);
          if (g) g->noalias() -= (A * p[k] / (s2 * z)) * lin[k].r;
          if (h) {
            const double w = A * p[k] * p[k] / (s2 * s2 * z * z);
            h->noalias() += w * lin[k].r * lin[k].r.transpose();
          }
        }
        return f0;
      };
    } else {
      prog.objective = [&,K,N](const Vec& x, Vec* g, Mat* h) {
        const double A = params.bandwidth_hz * tau1_noma / (kLn2 * R0);
        double z = 1.0;
        Vec s = Vec::Zero(2 * N);
        for (int k = 0; k < K; ++k) {
          if (!involved[k]) continue;
          z += p[k] * (lin[k].c0 + lin[k].r.dot(x)) / s2;
          s.noalias() += (p[k] / s2) * lin[k].r;
        }
        if (g) g->noalias() -= (A / z) * s;
        if (h) h->noalias() += (A / (z * z)) * s * s.transpose();
        return -A * std::log(z);
      };
    }

    if (harvest_w) {
      SmoothFn base = prog.objective;
      prog.objective = [&, base](const Vec& x, Vec* g, Mat* h) {
        double f0 = base(x, g, h);
        for (int k = 0; k < K; ++k) {
          const double w = (*harvest_w)[k] * alloc.tau0 * epe / R0;
          if (w <= 0) continue;
          f0 -= w * (lin[k].c0 + lin[k].r.dot(x));
          if (g) g->noalias() -= w * lin[k].r;
        }
        return f0;
      };
    }

    // Keep the minorant SNRs in the log domain.
    for (int k = 0; k < K; ++k) {
      if (!involved[k]) continue;
      const double za = 1.0 + p[k] * (lin[k].c0 + lin[k].r.dot(beam_to_coords(cur))) / s2;
      prog.constraints.push_back([&, k, za](const Vec& x, Vec* g, Mat*) {
        const double z = 1.0 + p[k] * (lin[k].c0 + lin[k].r.dot(x)) / s2;
        if (g) g->noalias() -= (p[k] / (s2 * za)) * lin[k].r;
        return 1e-6 - z / za;
      });
    }

    if (dibf == DibfCase::Case1) {
      for (int k = 0; k < K; ++k) {
        if (use[k] <= 0) continue;
        const double cap_a =
            alloc.tau0 * epe * std::norm(beam_response(chan, k, cur));
        if (cap_a <= 0) return cur;  // anchor infeasible for this device
        prog.constraints.push_back([&, k, cap_a](const Vec& x, Vec* g, Mat*) {
          const double cap = alloc.tau0 * epe * (lin[k].c0 + lin[k].r.dot(x));
          if (g) g->noalias() -= (alloc.tau0 * epe / cap_a) * lin[k].r;
          return ((1.0 - kEnergyRelax) * use[k] - cap) / cap_a;
        });
      }
    }
    add_disk_constraints(prog, N);

    BarrierOptions bo;
    bo.gap_tol = 1e-9;
    const Vec x0 = kStartShrink * beam_to_coords(cur);
    BarrierResult r = barrier_minimize(prog, x0, bo);
    const CVec cand = coords_to_beam(r.x, N);
    const double cand_rate = value_at(cand);
    if (cand_rate <= cur_rate) break;
    const double step = cand_rate - cur_rate;
    cur = cand;
    cur_rate = cand_rate;
    if (step <= opts.rel_tol * (1.0 + cur_rate)) break;
  }
  return cur;
}

// WPT phase: maximize the dual-weighted harvested energy over the WPT beam,
// subject to keeping every device's current consumption covered. The weights
// are the energy-constraint duals of the allocation subproblem, i.e. the
// gradient of its value function with respect to the harvest caps — so this
// pushes the beam where extra energy is worth the most bits — while the
// coverage floors keep the current allocation feasible, so the follow-up
// allocation re-solve cannot lose objective.
CVec wpt_phase(const SystemParams& params, const ChannelRealization& chan,
               const ResourceAllocation& alloc, const std::vector<double>& weights,
               const CVec& start, const BfOptions& opts) {
  const int K = chan.num_devices();
  const int N = static_cast<int>(start.size());
  const double epe = params.eh_efficiency * params.hap_tx_power_w;
  if (alloc.tau0 <= 0 || N == 0) return start;

  std::vector<double> use(K, 0.0), norm_e(K, 0.0);
  double wsum = 0;
  for (int k = 0; k < K; ++k) {
    const double f = alloc.freq[k];
    use[k] = alloc.energy[k] + params.frame_s * params.cpu_energy_coeff * f * f * f;
    norm_e[k] = alloc.tau0 * epe * std::norm(beam_response(chan, k, start));
    if (use[k] > 0 && norm_e[k] <= 0) return start;  // anchor can't cover it
    wsum += weights[k] * norm_e[k];
  }
  if (wsum <= 0) return start;

  auto weighted_harvest = [&](const CVec& v) {
    double acc = 0;
    for (int k = 0; k < K; ++k)
      acc += weights[k] * alloc.tau0 * epe * std::norm(beam_response(chan, k, v));
    return acc / wsum;
  };
  auto covers = [&](const CVec& v) {
    for (int k = 0; k < K; ++k) {
      if (use[k] <= 0) continue;
      if (alloc.tau0 * epe * std::norm(beam_response(chan, k, v)) <
          use[k] * (1.0 - 10 * kEnergyRelax))
        return false;
    }
    return true;
  };

  CVec cur = start;
  double cur_val = weighted_harvest(cur);

  for (int it = 0; it < opts.max_sca_iters; ++it) {
    std::vector<LinGain> lin(K);
    for (int k = 0; k < K; ++k) lin[k] = linearize_gain(chan, k, cur);

    ConvexProgram prog;
    prog.objective = [&, K](const Vec& x, Vec* g, Mat*) {
      double acc = 0;
      for (int k = 0; k < K; ++k) {
        const double w = weights[k] * alloc.tau0 * epe / wsum;
        acc += w * (lin[k].c0 + lin[k].r.dot(x));
        if (g) g->noalias() -= w * lin[k].r;
      }
      return -acc;
    };
    for (int k = 0; k < K; ++k) {
      if (use[k] <= 0) continue;
      prog.constraints.push_back([&, k](const Vec& x, Vec* g, Mat*) {
        const double cap = alloc.tau0 * epe * (lin[k].c0 + lin[k].r.dot(x));
        if (g) g->noalias() -= (alloc.tau0 * epe / norm_e[k]) * lin[k].r;
        return ((1.0 - kEnergyRelax) * use[k] - cap) / norm_e[k];
      });
    }
    add_disk_constraints(prog, N);

    BarrierOptions bo;
    bo.gap_tol = 1e-9;
    const Vec x0 = kStartShrink * beam_to_coords(cur);
    BarrierResult r = barrier_minimize(prog, x0, bo);
    const CVec cand = coords_to_beam(r.x, N);
    if (!covers(cand)) break;
    const double cand_val = weighted_harvest(cand);
    if (cand_val <= cur_val + 1e-12) break;
    const bool stalled = cand_val <= cur_val * (1.0 + opts.rel_tol);
    cur = cand;
    cur_val = cand_val;
    if (stalled) break;
  }
  return cur;
}

} // namespace

CVec extended_channel(const ChannelRealization& chan, int k) {
  const auto& q = chan.q_cascaded.at(static_cast<std::size_t>(k));
  CVec qbar(q.size() + 1);
  qbar.head(q.size()) = q;
  qbar[q.size()] = chan.h_direct[k];
  return qbar;
}

CVec extend_beam(const BeamVector& v) {
  CVec vbar(v.entries.size() + 1);
  vbar.head(v.entries.size()) = v.entries;
  vbar[v.entries.size()] = Complex(1.0, 0.0);
  return vbar;
}

double sca_lower_bound(const CVec& qbar, const CVec& vbar, const CVec& vbar_anchor) {
  if (qbar.size() != vbar.size() || qbar.size() != vbar_anchor.size())
    throw std::invalid_argument("dimension mismatch");
  const Complex wa = qbar.dot(vbar_anchor);  // qbar^H vbar_anchor
  const Complex w = qbar.dot(vbar);
  return 2.0 * std::real(std::conj(wa) * w) - std::norm(wa);
}

BeamVector project_unit_modulus(const BeamVector& v) {
  BeamVector out;
  out.mode = ModulusMode::UnitModulus;
  out.entries = v.entries;
  for (Eigen::Index n = 0; n < out.entries.size(); ++n) {
    const double m = std::abs(out.entries[n]);
    out.entries[n] = m < 1e-12 ? Complex(1.0, 0.0) : out.entries[n] / m;
  }
  return out;
}

BeamVector case3_optimal_phases(const ChannelRealization& chan, int k) {
  const auto& q = chan.q_cascaded.at(static_cast<std::size_t>(k));
  BeamVector v;
  v.mode = ModulusMode::UnitModulus;
  v.entries = CVec(q.size());
  const double phi_d = std::arg(std::conj(chan.h_direct[k]));
  // Align each reflected term conj(q_n) v_n with the direct term conj(h_d).
  for (Eigen::Index n = 0; n < q.size(); ++n)
    v.entries[n] = std::polar(1.0, phi_d + std::arg(q[n]));
  return v;
}

// Marginal bit value of extra harvested energy for each device under the
// current allocation: the offload-rate derivative for offloading devices and
// the local-computing derivative for compute-only devices.
std::vector<double> energy_value_weights(const SystemParams& params,
                                         const ResourceAllocation& alloc,
                                         const std::vector<double>& g, MaScheme ma) {
  const int K = static_cast<int>(g.size());
  std::vector<double> w(K, 0.0);
  const double s2 = params.noise_power_w;
  double noma_z = 0, noma_tau = 0;
  if (ma == MaScheme::Noma) {
    for (double t : alloc.tau1) noma_tau += t;
    for (int k = 0; k < K; ++k) noma_z += alloc.energy[k] * g[k];
  }
  for (int k = 0; k < K; ++k) {
    const double tau = ma == MaScheme::Noma
                           ? noma_tau
                           : (k < static_cast<int>(alloc.tau1.size()) ? alloc.tau1[k] : 0.0);
    if (alloc.energy[k] > 0 && tau > 0 && g[k] > 0) {
      const double gamma = ma == MaScheme::Noma ? noma_z / (tau * s2)
                                                : alloc.energy[k] * g[k] / (tau * s2);
      w[k] = params.bandwidth_hz * g[k] / (s2 * (1.0 + gamma) * std::log(2.0));
    } else if (alloc.freq[k] > 0) {
      w[k] = 1.0 / (3.0 * params.cycles_per_bit * params.cpu_energy_coeff *
                    alloc.freq[k] * alloc.freq[k]);
    }
  }
  return w;
}

ScaState solve_bf_subproblem(const ScaState& state, const ResourceAllocation& alloc,
                             const SystemParams& params,
                             const ChannelRealization& chan, DibfCase dibf,
                             MaScheme ma, const BfOptions& opts) {
  ScaState out = state;
  out.iteration = state.iteration + 1;
  const int K = chan.num_devices();

  if (dibf == DibfCase::Case1) {
    std::vector<double> gains(K, 0.0);
    for (int k = 0; k < K; ++k)
      gains[k] = std::norm(beam_response(chan, k, state.v0.entries));
    const std::vector<double> weights =
        energy_value_weights(params, alloc, gains, ma);
    const CVec v = rate_phase(params, chan, alloc, dibf, ma, state.v0.entries,
                              opts, &weights);
    out.v0.entries = v;
    out.v0.mode = ModulusMode::RelaxedDisk;
    out.v1 = out.v0;
  } else {
    if (dibf == DibfCase::Case2) {
      const CVec v1 =
          rate_phase(params, chan, alloc, dibf, ma, state.v1.entries, opts);
      out.v1.entries = v1;
      out.v1.mode = ModulusMode::RelaxedDisk;
    }
    std::vector<double> gains(K, 0.0);
    for (int k = 0; k < K; ++k) {
      const CVec off = dibf == DibfCase::Case3
                           ? case3_optimal_phases(chan, k).entries
                           : out.v1.entries;
      gains[k] = std::norm(beam_response(chan, k, off));
    }
    const std::vector<double> weights =
        energy_value_weights(params, alloc, gains, ma);
    const CVec v0 = wpt_phase(params, chan, alloc, weights, state.v0.entries, opts);
    out.v0.entries = v0;
    out.v0.mode = ModulusMode::RelaxedDisk;
  }

  out.slack_S.assign(K, 0.0);
  const CVec& off = dibf == DibfCase::Case1 ? out.v0.entries : out.v1.entries;
  for (int k = 0; k < K; ++k)
    out.slack_S[k] = std::norm(beam_response(chan, k, off));
  return out;
}

} // namespace wpmec
