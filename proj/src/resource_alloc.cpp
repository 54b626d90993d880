// SPDX-License-Identifier: Apache-2.0
#include "wpmec/resource_alloc.hpp"

#include "wpmec/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace wpmec {

namespace {

constexpr double kLn2 = std::numbers::ln2;

struct Layout {
  int i_tau0 = -1;                 // -1 when tau0 is pinned
  std::vector<int> i_tau;          // TDMA slots (-1 if excluded)
  int i_tau1 = -1;                 // NOMA shared slot
  std::vector<int> i_e;
  std::vector<int> i_f;
  int i_s = -1;                    // phase-1 QoS slack
  int dim = 0;
};

struct Ctx {
  const RaProblem* p = nullptr;
  Layout lay;
  // unscaled-per-scaled factors
  double T = 1, E0 = 1, F0 = 1, R0 = 1;
  std::vector<char> off_ok, f_var, has_en;
  std::vector<double> f_fixed;     // value when f is pinned (0 if f excluded)
  bool phase1 = false;

  double tau0(const Vec& x) const {
    return lay.i_tau0 >= 0 ? x[lay.i_tau0] * T : *p->fixed_tau0;
  }
  double tau_k(const Vec& x, int k) const {
    return lay.i_tau[k] >= 0 ? x[lay.i_tau[k]] * T : 0.0;
  }
  double tau1(const Vec& x) const { return lay.i_tau1 >= 0 ? x[lay.i_tau1] * T : 0.0; }
  double e_k(const Vec& x, int k) const {
    return lay.i_e[k] >= 0 ? x[lay.i_e[k]] * E0 : 0.0;
  }
  double f_k(const Vec& x, int k) const {
    return lay.i_f[k] >= 0 ? x[lay.i_f[k]] * F0 : f_fixed[k];
  }
};

// Perspective rate term phi = B * tau * log2(1 + e*a/tau), with gradient and
// Hessian accumulated into the (scaled) vectors at indices it (tau) and ie.
double add_rate_term(const Ctx& c, const Vec& x, Vec* grad, Mat* hess, int it,
                     int ie, double a, double B, double sign) {
  const double tau = x[it] * c.T;
  const double e = x[ie] * c.E0;
  const double u = e * a / tau;
  const double D = 1.0 + u;
  const double phi = B * tau * std::log1p(u) / kLn2;
  if (grad) {
    const double dtau = B * (std::log1p(u) - u / D) / kLn2;
    const double de = B * a / (D * kLn2);
    (*grad)[it] += sign * dtau * c.T;
    (*grad)[ie] += sign * de * c.E0;
  }
  if (hess) {
    const double s = B / (tau * D * D * kLn2);
    (*hess)(it, it) += sign * (-s * u * u) * c.T * c.T;
    (*hess)(ie, ie) += sign * (-s * a * a) * c.E0 * c.E0;
    const double cross = sign * (s * a * u) * c.T * c.E0;
    (*hess)(it, ie) += cross;
    (*hess)(ie, it) += cross;
  }
  return phi;
}

// Joint NOMA term B * tau1 * log2(1 + sum_k e_k a_k / tau1).
double add_noma_term(const Ctx& c, const Vec& x, Vec* grad, Mat* hess,
                     const std::vector<int>& ks, double B, double sign) {
  const int it = c.lay.i_tau1;
  const double tau = x[it] * c.T;
  double z = 0;
  for (int k : ks) z += c.e_k(x, k) * c.p->gain_off[k] / c.p->params->noise_power_w;
  const double u = z / tau;
  const double D = 1.0 + u;
  const double phi = B * tau * std::log1p(u) / kLn2;
  if (grad) {
    (*grad)[it] += sign * B * (std::log1p(u) - u / D) / kLn2 * c.T;
    for (int k : ks) {
      const double a = c.p->gain_off[k] / c.p->params->noise_power_w;
      (*grad)[c.lay.i_e[k]] += sign * B * a / (D * kLn2) * c.E0;
    }
  }
  if (hess) {
    const double s = B / (tau * D * D * kLn2);
    (*hess)(it, it) += sign * (-s * u * u) * c.T * c.T;
    for (int k : ks) {
      const double ak = c.p->gain_off[k] / c.p->params->noise_power_w;
      const int iek = c.lay.i_e[k];
      const double cr = sign * (s * ak * u) * c.T * c.E0;
      (*hess)(it, iek) += cr;
      (*hess)(iek, it) += cr;
      for (int j : ks) {
        const double aj = c.p->gain_off[j] / c.p->params->noise_power_w;
        (*hess)(iek, c.lay.i_e[j]) += sign * (-s * ak * aj) * c.E0 * c.E0;
      }
    }
  }
  return phi;
}

double m_tilde(double gamma) {
  // log2(1+G) - G/((1+G) ln2); increasing in G.
  return std::log1p(gamma) / kLn2 - gamma / ((1.0 + gamma) * kLn2);
}

ResourceAllocation make_alloc(const Ctx& c, const Vec& x) {
  const RaProblem& p = *c.p;
  const int K = p.num_devices();
  ResourceAllocation a;
  a.tau0 = c.tau0(x);
  a.energy.assign(K, 0.0);
  a.power.assign(K, 0.0);
  a.freq.assign(K, 0.0);
  if (p.ma == MaScheme::Tdma) {
    a.tau1.assign(K, 0.0);
    for (int k = 0; k < K; ++k) a.tau1[k] = c.tau_k(x, k);
  } else {
    a.tau1 = {c.tau1(x)};
  }
  for (int k = 0; k < K; ++k) {
    a.energy[k] = c.e_k(x, k);
    a.freq[k] = c.f_k(x, k);
  }
  // Round vanishing slots to exactly zero and derive powers.
  const double tiny_t = 1e-9 * c.T;
  if (p.ma == MaScheme::Tdma) {
    for (int k = 0; k < K; ++k) {
      if (a.tau1[k] < tiny_t || a.energy[k] <= 0) {
        a.tau1[k] = 0;
        a.energy[k] = 0;
      } else {
        a.power[k] = a.energy[k] / a.tau1[k];
      }
    }
  } else {
    if (a.tau1[0] < tiny_t) {
      a.tau1[0] = 0;
      std::fill(a.energy.begin(), a.energy.end(), 0.0);
    } else {
      for (int k = 0; k < K; ++k) {
        if (a.energy[k] <= 1e-15 * c.E0) a.energy[k] = 0;
        a.power[k] = a.energy[k] / a.tau1[0];
      }
    }
  }
  for (int k = 0; k < K; ++k)
    if (a.freq[k] < 1e-12 * c.F0) a.freq[k] = 0;
  return a;
}

double alloc_objective(const RaProblem& p, const ResourceAllocation& a) {
  const auto& pr = *p.params;
  double bits = 0;
  if (p.ma == MaScheme::Tdma) {
    for (int k = 0; k < p.num_devices(); ++k)
      bits += rate_term_bits(pr.bandwidth_hz, a.tau1[k], a.energy[k], p.gain_off[k],
                             pr.noise_power_w);
  } else {
    double z = 0;
    for (int k = 0; k < p.num_devices(); ++k) z += a.energy[k] * p.gain_off[k];
    bits += rate_term_bits(pr.bandwidth_hz, a.tau1[0], 1.0, z, pr.noise_power_w);
  }
  return total_bits(pr, a, bits);
}

// ---------------------------------------------------------------------------
// Structured KKT refinement for the unrestricted problem shape. At the
// optimum every offload-active device shares the SNR Gamma*, its energy
// constraint is tight, and the time budget is tight; the remaining scalar
// unknown solves the tau0-stationarity balance.
// ---------------------------------------------------------------------------

struct StructuredSolution {
  ResourceAllocation alloc;
  std::vector<int> active;
  std::vector<double> lambda;
  double mu = 0;
  double residual = 0;
  bool ok = false;
};

StructuredSolution solve_structured(const RaProblem& p, std::vector<int> active) {
  const auto& pr = *p.params;
  const int K = p.num_devices();
  const double T = pr.frame_s;
  const double s2 = pr.noise_power_w;
  const double gc = pr.cpu_energy_coeff;
  const double B = pr.bandwidth_hz;
  const double C = pr.cycles_per_bit;
  const double epe = pr.eh_efficiency * pr.hap_tx_power_w;

  StructuredSolution out;
  for (int pass = 0; pass < K + 1; ++pass) {
    std::vector<char> in_a(K, 0);
    for (int k : active) in_a[k] = 1;

    auto f_off = [&](int k, double gamma) {
      return std::sqrt(s2 * (1.0 + gamma) * kLn2 / (3.0 * C * gc * B * p.gain_off[k]));
    };
    auto tau0_of = [&](double gamma) {
      double num = T, den = 1.0;
      for (int k : active) {
        const double f = f_off(k, gamma);
        num += T * gc * f * f * f * p.gain_off[k] / (gamma * s2);
        den += epe * p.gain_wpt[k] * p.gain_off[k] / (gamma * s2);
      }
      return num / den;
    };
    auto balance = [&](double gamma) {
      // eta*P_E * sum_k lambda_k h_k - mu, normalized by B.
      const double t0 = tau0_of(gamma);
      double acc = 0;
      for (int k = 0; k < K; ++k) {
        if (p.gain_wpt[k] <= 0) continue;
        double lam;
        if (in_a[k]) {
          lam = B * p.gain_off[k] / (s2 * (1.0 + gamma) * kLn2);
        } else {
          const double f = std::cbrt(t0 * epe * p.gain_wpt[k] / (T * gc));
          lam = f > 0 ? 1.0 / (3.0 * C * gc * f * f) : 0.0;
        }
        acc += epe * lam * p.gain_wpt[k];
      }
      return (acc - B * m_tilde(gamma)) / B;
    };

    ResourceAllocation a;
    a.energy.assign(K, 0.0);
    a.power.assign(K, 0.0);
    a.freq.assign(K, 0.0);
    a.tau1.assign(p.ma == MaScheme::Tdma ? K : 1, 0.0);
    out.lambda.assign(K, 0.0);

    if (active.empty()) {
      a.tau0 = T;
      for (int k = 0; k < K; ++k) {
        if (p.gain_wpt[k] <= 0) continue;
        a.freq[k] = std::cbrt(epe * p.gain_wpt[k] / gc);
        out.lambda[k] = 1.0 / (3.0 * C * gc * a.freq[k] * a.freq[k]);
      }
      out.alloc = a;
      out.active = {};
      out.mu = 0;
      out.residual = 0;
      out.ok = true;
      return out;
    }

    // Bracket and bisect the decreasing balance function.
    double lo = 1e-12, hi = 1.0;
    if (balance(lo) <= 0) { out.ok = false; return out; }
    int grow = 0;
    while (balance(hi) > 0) {
      hi *= 2.0;
      if (++grow > 300) { out.ok = false; return out; }
    }
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (balance(mid) > 0 ? lo : hi) = mid;
    }
    const double gamma = 0.5 * (lo + hi);
    const double t0 = tau0_of(gamma);

    // Assemble; drop devices whose residual energy is nonpositive.
    std::vector<int> keep;
    bool dropped = false;
    a.tau0 = t0;
    for (int k : active) {
      const double f = f_off(k, gamma);
      const double e = t0 * epe * p.gain_wpt[k] - T * gc * f * f * f;
      if (e <= 0) {
        dropped = true;
        continue;
      }
      keep.push_back(k);
      a.energy[k] = e;
      a.freq[k] = f;
      const double tk = e * p.gain_off[k] / (gamma * s2);
      if (p.ma == MaScheme::Tdma) {
        a.tau1[k] = tk;
        a.power[k] = e / tk;
      } else {
        a.tau1[0] += tk;
      }
      out.lambda[k] = B * p.gain_off[k] / (s2 * (1.0 + gamma) * kLn2);
    }
    if (dropped) {
      active = keep;
      continue;
    }
    if (p.ma == MaScheme::Noma && a.tau1[0] > 0) {
      for (int k : active) a.power[k] = a.energy[k] / a.tau1[0];
    }
    for (int k = 0; k < K; ++k) {
      if (in_a[k] || p.gain_wpt[k] <= 0) continue;
      a.freq[k] = std::cbrt(t0 * epe * p.gain_wpt[k] / (T * gc));
      out.lambda[k] = a.freq[k] > 0 ? 1.0 / (3.0 * C * gc * a.freq[k] * a.freq[k]) : 0.0;
    }
    out.alloc = a;
    out.active = active;
    out.mu = B * m_tilde(gamma);
    out.residual = std::abs(balance(gamma));
    out.ok = true;
    return out;
  }
  out.ok = false;
  return out;
}

} // namespace

double snr_tdma(const RaProblem& problem, const ResourceAllocation& alloc, int k) {
  if (alloc.tau1[k] <= 0 || alloc.energy[k] <= 0) return 0.0;
  return alloc.energy[k] * problem.gain_off[k] /
         (alloc.tau1[k] * problem.params->noise_power_w);
}

RaResult solve_ra(const RaProblem& problem) {
  const RaProblem& p = problem;
  const auto& pr = *p.params;
  pr.validate();
  const int K = p.num_devices();
  if (static_cast<int>(p.gain_off.size()) != K)
    throw std::invalid_argument("gain vectors must both have K entries");

  const double T = pr.frame_s;
  const double epe = pr.eh_efficiency * pr.hap_tx_power_w;

  Ctx c;
  c.p = &p;
  c.T = T;
  c.R0 = pr.bandwidth_hz * T;
  c.has_en.assign(K, 0);
  c.off_ok.assign(K, 0);
  c.f_var.assign(K, 0);
  c.f_fixed.assign(K, 0.0);
  double emax = 0;
  for (int k = 0; k < K; ++k) {
    c.has_en[k] = p.gain_wpt[k] > 0;
    emax = std::max(emax, epe * p.gain_wpt[k] * T);
    c.off_ok[k] = c.has_en[k] && p.gain_off[k] > 0 && !p.forbid_offload;
    if (p.fixed_freq) {
      c.f_fixed[k] = (*p.fixed_freq)[k];
    } else {
      c.f_var[k] = c.has_en[k] && !p.forbid_local;
    }
  }
  c.E0 = emax > 0 ? emax : 1.0;
  c.F0 = std::cbrt(c.E0 / (T * pr.cpu_energy_coeff));

  RaResult res;
  res.alloc.energy.assign(K, 0.0);
  res.alloc.power.assign(K, 0.0);
  res.alloc.freq.assign(K, 0.0);
  res.alloc.tau1.assign(p.ma == MaScheme::Tdma ? K : 1, 0.0);
  res.kkt.dual_energy.assign(K, 0.0);

  if (emax <= 0 && !p.fixed_freq) {
    // No device can harvest anything: the zero allocation is optimal.
    res.alloc.tau0 = p.fixed_tau0.value_or(0.0);
    res.objective_bits = 0;
    res.message = "no harvestable energy";
    return res;
  }

  // tau0 lower bound imposed by pinned frequencies.
  double tau0_min = 0;
  if (p.fixed_freq) {
    for (int k = 0; k < K; ++k) {
      const double need = T * pr.cpu_energy_coeff * std::pow(c.f_fixed[k], 3);
      if (need > 0) {
        if (!c.has_en[k]) {
          res.feasible = false;
          res.message = "fixed frequency with zero WPT gain is infeasible";
          return res;
        }
        tau0_min = std::max(tau0_min, need / (epe * p.gain_wpt[k]));
      }
    }
    if (tau0_min >= T * (1.0 - 1e-12) ||
        (p.fixed_tau0 && *p.fixed_tau0 < tau0_min)) {
      res.feasible = false;
      res.message = "fixed frequencies exhaust the frame energy budget";
      return res;
    }
  }

  // --- variable layout -----------------------------------------------------
  auto build_layout = [&](bool with_slack) {
    Layout l;
    l.i_tau.assign(K, -1);
    l.i_e.assign(K, -1);
    l.i_f.assign(K, -1);
    int d = 0;
    if (!p.fixed_tau0) l.i_tau0 = d++;
    bool any_off = false;
    for (int k = 0; k < K; ++k) any_off |= static_cast<bool>(c.off_ok[k]);
    if (p.ma == MaScheme::Noma && any_off) l.i_tau1 = d++;
    for (int k = 0; k < K; ++k) {
      if (c.off_ok[k]) {
        if (p.ma == MaScheme::Tdma) l.i_tau[k] = d++;
        l.i_e[k] = d++;
      }
      if (c.f_var[k]) l.i_f[k] = d++;
    }
    if (with_slack) l.i_s = d++;
    l.dim = d;
    return l;
  };

  auto build_program = [&](bool phase1) {
    ConvexProgram prog;
    const Layout& l = c.lay;
    std::vector<int> noma_ks;
    for (int k = 0; k < K; ++k)
      if (c.off_ok[k]) noma_ks.push_back(k);

    prog.objective = [&c, &p, &pr, l, noma_ks, phase1](const Vec& x, Vec* g, Mat* h) {
      if (phase1) {
        if (g) (*g)[l.i_s] -= 1.0;
        return -x[l.i_s];
      }
      double bits = 0;
      if (p.ma == MaScheme::Tdma) {
        for (int k = 0; k < p.num_devices(); ++k)
          if (l.i_tau[k] >= 0)
            bits += add_rate_term(c, x, g, h, l.i_tau[k], l.i_e[k],
                                  p.gain_off[k] / pr.noise_power_w, pr.bandwidth_hz,
                                  -1.0 / c.R0);
      } else if (l.i_tau1 >= 0) {
        bits += add_noma_term(c, x, g, h, noma_ks, pr.bandwidth_hz, -1.0 / c.R0);
      }
      for (int k = 0; k < p.num_devices(); ++k) {
        const double f = c.f_k(x, k);
        bits += pr.frame_s * f / pr.cycles_per_bit;
        if (g && l.i_f[k] >= 0)
          (*g)[l.i_f[k]] -= pr.frame_s / pr.cycles_per_bit * c.F0 / c.R0;
      }
      return -bits / c.R0;
    };

    // Nonnegativity of every variable except the phase-1 slack.
    for (int j = 0; j < l.dim; ++j) {
      if (j == l.i_s) continue;
      prog.constraints.push_back([j](const Vec& x, Vec* g, Mat*) {
        if (g) (*g)[j] -= 1.0;
        return -x[j];
      });
    }

    // Time budget.
    prog.constraints.push_back([&c, l, &p](const Vec& x, Vec* g, Mat*) {
      double tsum = c.tau0(x);
      if (p.ma == MaScheme::Tdma) {
        for (int k = 0; k < p.num_devices(); ++k) tsum += c.tau_k(x, k);
      } else {
        tsum += c.tau1(x);
      }
      if (g) {
        if (l.i_tau0 >= 0) (*g)[l.i_tau0] += 1.0;
        if (l.i_tau1 >= 0) (*g)[l.i_tau1] += 1.0;
        for (int k = 0; k < p.num_devices(); ++k)
          if (l.i_tau[k] >= 0) (*g)[l.i_tau[k]] += 1.0;
      }
      return tsum / c.T - 1.0;
    });

    // Energy causality per device.
    const double epe_l = epe;
    for (int k = 0; k < K; ++k) {
      if (!c.has_en[k]) continue;
      if (l.i_e[k] < 0 && l.i_f[k] < 0 && c.f_fixed[k] <= 0) continue;
      const double scale = epe_l * p.gain_wpt[k] * c.T;
      prog.constraints.push_back([&c, &p, &pr, l, k, epe_l, scale](const Vec& x, Vec* g,
                                                                   Mat* h) {
        const double f = c.f_k(x, k);
        const double used = c.e_k(x, k) + pr.frame_s * pr.cpu_energy_coeff * f * f * f;
        const double cap = c.tau0(x) * epe_l * p.gain_wpt[k];
        if (g) {
          if (l.i_e[k] >= 0) (*g)[l.i_e[k]] += c.E0 / scale;
          if (l.i_f[k] >= 0)
            (*g)[l.i_f[k]] +=
                3.0 * pr.frame_s * pr.cpu_energy_coeff * f * f * c.F0 / scale;
          if (l.i_tau0 >= 0) (*g)[l.i_tau0] -= epe_l * p.gain_wpt[k] * c.T / scale;
        }
        if (h && l.i_f[k] >= 0)
          (*h)(l.i_f[k], l.i_f[k]) +=
              6.0 * pr.frame_s * pr.cpu_energy_coeff * f * c.F0 * c.F0 / scale;
        return (used - cap) / scale;
      });
    }

    // Optional QoS (TDMA shape): computed bits of device k at least R_min.
    if (p.qos_min_bits) {
      for (int k = 0; k < K; ++k) {
        const double rmin = (*p.qos_min_bits)[k];
        if (rmin <= 0 && !phase1) continue;
        prog.constraints.push_back([&c, &p, &pr, l, k, rmin, phase1](const Vec& x,
                                                                     Vec* g, Mat* h) {
          double bits = 0;
          if (l.i_tau[k] >= 0)
            bits = add_rate_term(c, x, g, h, l.i_tau[k], l.i_e[k],
                                 p.gain_off[k] / pr.noise_power_w, pr.bandwidth_hz,
                                 -1.0 / c.R0);
          const double f = c.f_k(x, k);
          bits += pr.frame_s * f / pr.cycles_per_bit;
          if (g && l.i_f[k] >= 0)
            (*g)[l.i_f[k]] -= pr.frame_s / pr.cycles_per_bit * c.F0 / c.R0;
          double v = (rmin - bits) / c.R0;
          if (phase1) {
            v += x[l.i_s];
            if (g) (*g)[l.i_s] += 1.0;
          }
          return v;
        });
      }
    }
    return prog;
  };

  // --- strictly feasible start ----------------------------------------------
  auto initial_point = [&]() {
    const Layout& l = c.lay;
    Vec x = Vec::Zero(l.dim);
    double t0 = p.fixed_tau0 ? *p.fixed_tau0 : std::max(0.5 * T, 0.5 * (tau0_min + T));
    if (!p.fixed_tau0 && tau0_min < 0.4 * T) t0 = 0.5 * T;
    if (l.i_tau0 >= 0) x[l.i_tau0] = t0 / T;
    int nslots = 0;
    for (int k = 0; k < K; ++k) nslots += c.off_ok[k] ? 1 : 0;
    const double share = nslots > 0 ? 0.8 * (T - t0) / nslots : 0.0;
    if (l.i_tau1 >= 0) x[l.i_tau1] = 0.8 * (T - t0) / T;
    for (int k = 0; k < K; ++k) {
      const double cap = t0 * epe * p.gain_wpt[k];
      const double fneed = T * pr.cpu_energy_coeff * std::pow(c.f_fixed[k], 3);
      if (l.i_tau[k] >= 0) x[l.i_tau[k]] = share / T;
      if (l.i_e[k] >= 0) {
        const double budget = cap - (p.fixed_freq ? fneed : 0.0);
        x[l.i_e[k]] = std::max(1e-12, (p.fixed_freq || !c.f_var[k] ? 0.5 * budget
                                                                   : 0.25 * cap)) /
                      c.E0;
      }
      if (l.i_f[k] >= 0) {
        const double f = std::cbrt(0.25 * cap / (T * pr.cpu_energy_coeff));
        x[l.i_f[k]] = std::max(f, 1e-9 * c.F0) / c.F0;
      }
    }
    return x;
  };

  // --- QoS phase 1 ------------------------------------------------------------
  if (p.qos_min_bits) {
    c.lay = build_layout(true);
    ConvexProgram prog1 = build_program(true);
    Vec x0 = initial_point();
    // Start s strictly below the smallest current slack.
    double smin = 1e300;
    {
      const ResourceAllocation a = make_alloc(c, x0);
      for (int k = 0; k < K; ++k) {
        const double bits =
            rate_term_bits(pr.bandwidth_hz, p.ma == MaScheme::Tdma ? a.tau1[k] : 0.0,
                           a.energy[k], p.gain_off[k], pr.noise_power_w) +
            pr.frame_s * a.freq[k] / pr.cycles_per_bit;
        smin = std::min(smin, (bits - (*p.qos_min_bits)[k]) / c.R0);
      }
    }
    x0[c.lay.i_s] = smin - 0.1;
    BarrierOptions o1;
    o1.gap_tol = 1e-8;
    BarrierResult r1 = barrier_minimize(prog1, x0, o1);
    if (-r1.objective <= 1e-9) {
      res.feasible = false;
      res.message = "QoS requirements are infeasible";
      return res;
    }
    // Continue from the strictly QoS-feasible phase-1 point.
    Vec xs = r1.x.head(c.lay.dim - 1);
    c.lay = build_layout(false);
    ConvexProgram prog = build_program(false);
    BarrierResult r = barrier_minimize(prog, xs);
    res.alloc = make_alloc(c, r.x);
    res.objective_bits = alloc_objective(p, res.alloc);
    res.kkt.kkt_residual = r.kkt_residual;
    res.message = r.message;
  } else {
    c.lay = build_layout(false);
    ConvexProgram prog = build_program(false);
    BarrierResult r = barrier_minimize(prog, initial_point());
    res.alloc = make_alloc(c, r.x);
    res.objective_bits = alloc_objective(p, res.alloc);
    res.kkt.kkt_residual = r.kkt_residual;
    res.message = r.message;
  }

  for (int k = 0; k < K; ++k) {
    const bool on = p.ma == MaScheme::Tdma
                        ? res.alloc.tau1[k] > 0
                        : (!res.alloc.tau1.empty() && res.alloc.tau1[0] > 0 &&
                           res.alloc.energy[k] > 0);
    if (on) res.offload_active.push_back(k);
  }

  // Structured refinement for the plain problem shape.
  const bool plain = !p.fixed_freq && !p.qos_min_bits && !p.fixed_tau0 &&
                     !p.forbid_offload && !p.forbid_local;
  if (plain) {
    StructuredSolution s = solve_structured(p, res.offload_active);
    if (s.ok) {
      const double obj = alloc_objective(p, s.alloc);
      const bool better = obj >= res.objective_bits - 1e-8 * (1.0 + res.objective_bits);
      double tmax = s.alloc.tau0 + std::accumulate(s.alloc.tau1.begin(),
                                                   s.alloc.tau1.end(), 0.0);
      if (better && tmax <= T * (1.0 + 1e-9)) {
        res.alloc = s.alloc;
        res.objective_bits = obj;
        res.offload_active = s.active;
        res.kkt.dual_energy = s.lambda;
        res.kkt.dual_time = s.mu;
        res.kkt.kkt_residual = s.residual;
        res.polished = true;
      }
    }
  }
  return res;
}

RaResult solve_ra_equal_snr(const RaProblem& problem) {
  const RaProblem& p = problem;
  const auto& pr = *p.params;
  if (!p.fixed_freq) throw std::invalid_argument("solve_ra_equal_snr needs fixed_freq");
  if (p.ma != MaScheme::Tdma)
    throw std::invalid_argument("solve_ra_equal_snr is a TDMA construction");
  const int K = p.num_devices();
  const double T = pr.frame_s;
  const double s2 = pr.noise_power_w;
  const double epe = pr.eh_efficiency * pr.hap_tx_power_w;
  const std::vector<double>& f = *p.fixed_freq;

  RaResult res;
  res.alloc.tau1.assign(K, 0.0);
  res.alloc.energy.assign(K, 0.0);
  res.alloc.power.assign(K, 0.0);
  res.alloc.freq = f;
  res.kkt.dual_energy.assign(K, 0.0);

  auto local_need = [&](int k) {
    return T * pr.cpu_energy_coeff * f[k] * f[k] * f[k];
  };

  // Smallest tau0 that covers every device's pinned local energy.
  double tau0_min = 0;
  for (int k = 0; k < K; ++k) {
    if (local_need(k) <= 0) continue;
    if (p.gain_wpt[k] <= 0) {
      res.feasible = false;
      res.message = "fixed frequency with zero WPT gain";
      return res;
    }
    tau0_min = std::max(tau0_min, local_need(k) / (epe * p.gain_wpt[k]));
  }
  if (tau0_min > T) {
    res.feasible = false;
    res.message = "fixed frequencies exhaust the frame energy budget";
    return res;
  }

  auto fallback = [&]() {
    res.alloc.tau0 = T;
    res.objective_bits = alloc_objective(p, res.alloc);
    res.message = "zero-offloading fallback";
    return res;
  };

  std::vector<int> active;
  for (int k = 0; k < K; ++k)
    if (p.gain_wpt[k] > 0 && p.gain_off[k] > 0) active.push_back(k);

  for (int pass = 0; pass <= K; ++pass) {
    if (active.empty()) return fallback();

    // H(Gamma) = log2(1+G) - G/((1+G)ln2) - sum_A eta P_E h_k g_k/(s2 (1+G) ln2),
    // strictly increasing with H(0) < 0.
    double coupling = 0;
    for (int k : active) coupling += epe * p.gain_wpt[k] * p.gain_off[k];
    if (coupling <= 0) return fallback();
    auto hfun = [&](double g) { return m_tilde(g) - coupling / (s2 * (1.0 + g) * kLn2); };

    double lo = 0.0, hi = 1.0;
    int grow = 0;
    while (hfun(hi) < 0) {
      lo = hi;
      hi *= 2.0;
      if (++grow > 300) return fallback();
    }
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (hfun(mid) < 0 ? lo : hi) = mid;
    }
    double gamma = 0.5 * (lo + hi);

    double num = T, den = 1.0;
    for (int k : active) {
      num += local_need(k) * p.gain_off[k] / (gamma * s2);
      den += epe * p.gain_wpt[k] * p.gain_off[k] / (gamma * s2);
    }
    double tau0 = num / den;
    if (tau0 < tau0_min) {
      // A pinned local-energy requirement binds tau0; the offloading stage
      // shrinks to T - tau0_min and the common SNR follows from the time
      // budget instead of the stationarity root.
      tau0 = tau0_min;
      if (tau0 >= T * (1.0 - 1e-15)) return fallback();
      double z = 0;
      for (int k : active)
        z += std::max(0.0, tau0 * epe * p.gain_wpt[k] - local_need(k)) *
             p.gain_off[k];
      if (z <= 0) return fallback();
      gamma = z / (s2 * (T - tau0));
    }

    std::vector<int> keep;
    for (int k : active)
      if (tau0 * epe * p.gain_wpt[k] - local_need(k) > 0) keep.push_back(k);
    if (keep.size() != active.size()) {
      active = keep;
      continue;
    }

    res.alloc.tau0 = tau0;
    for (int k : active) {
      const double e = tau0 * epe * p.gain_wpt[k] - local_need(k);
      res.alloc.energy[k] = e;
      res.alloc.tau1[k] = e * p.gain_off[k] / (gamma * s2);
      res.alloc.power[k] = e / res.alloc.tau1[k];
      res.kkt.dual_energy[k] =
          pr.bandwidth_hz * p.gain_off[k] / (s2 * (1.0 + gamma) * kLn2);
    }
    // Inactive devices still need their pinned local energy covered.
    for (int k = 0; k < K; ++k) {
      if (local_need(k) > 0 && p.gain_wpt[k] > 0 &&
          tau0 * epe * p.gain_wpt[k] < local_need(k) * (1.0 - 1e-12)) {
        res.feasible = false;
        res.message = "closed form cannot cover pinned local energy";
        return res;
      }
    }
    res.offload_active = active;
    res.kkt.dual_time = pr.bandwidth_hz * m_tilde(gamma);
    // In the clamped regime the binding local-energy dual absorbs the
    // stationarity gap, so only the unclamped root contributes residual.
    res.kkt.kkt_residual = tau0 > tau0_min ? std::abs(hfun(gamma)) : 0.0;
    res.objective_bits = alloc_objective(p, res.alloc);
    res.message = "equal-snr closed form";
    return res;
  }
  return fallback();
}

namespace {

std::vector<double> offload_gains_for(const ChannelRealization& chan,
                                      const Solution& sol) {
  std::vector<double> g(chan.num_devices());
  for (int k = 0; k < chan.num_devices(); ++k)
    g[k] = offload_gain(chan, sol.beams, sol.dibf, k);
  return g;
}

} // namespace

Solution noma_from_tdma(const SystemParams& params, const ChannelRealization& chan,
                        const Solution& tdma_solution) {
  const Solution& in = tdma_solution;
  if (in.ma != MaScheme::Tdma) throw std::invalid_argument("expected a TDMA solution");
  Solution out = in;
  out.ma = MaScheme::Noma;
  const double tau1 = std::accumulate(in.alloc.tau1.begin(), in.alloc.tau1.end(), 0.0);
  out.alloc.tau1 = {tau1};
  // Per-device energies are preserved; powers follow from the shared slot.
  for (std::size_t k = 0; k < out.alloc.power.size(); ++k)
    out.alloc.power[k] = tau1 > 0 ? out.alloc.energy[k] / tau1 : 0.0;
  out.objective_bits = objective_bits(params, chan, out.beams, out.alloc, out.dibf,
                                      MaScheme::Noma);
  return out;
}

Solution tdma_from_noma(const SystemParams& params, const ChannelRealization& chan,
                        const Solution& noma_solution) {
  const Solution& in = noma_solution;
  if (in.ma != MaScheme::Noma) throw std::invalid_argument("expected a NOMA solution");
  Solution out = in;
  out.ma = MaScheme::Tdma;
  const int K = chan.num_devices();
  const double tau1 = in.alloc.tau1.empty() ? 0.0 : in.alloc.tau1[0];
  const std::vector<double> g = offload_gains_for(chan, in);

  out.alloc.tau1.assign(K, 0.0);
  double zsum = 0;
  for (int k = 0; k < K; ++k) zsum += in.alloc.energy[k] * g[k];
  out.offload_active.clear();
  if (tau1 > 0 && zsum > 0) {
    // Split the shared slot so every active device sees the common SNR
    // sum_j e_j g_j / (tau1 sigma^2).
    for (int k = 0; k < K; ++k) {
      const double z = in.alloc.energy[k] * g[k];
      if (z <= 0) continue;
      out.alloc.tau1[k] = tau1 * z / zsum;
      out.alloc.power[k] = in.alloc.energy[k] / out.alloc.tau1[k];
      out.offload_active.push_back(k);
    }
  } else {
    std::fill(out.alloc.power.begin(), out.alloc.power.end(), 0.0);
  }
  out.objective_bits = objective_bits(params, chan, out.beams, out.alloc, out.dibf,
                                      MaScheme::Tdma);
  return out;
}

} // namespace wpmec
