// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace wpmec {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;

enum class DibfCase { Case1 = 1, Case2 = 2, Case3 = 3 };
enum class MaScheme { Tdma, Noma };
enum class ModulusMode { UnitModulus, RelaxedDisk };

const char* to_string(DibfCase c);
const char* to_string(MaScheme m);

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

double distance(const Vec3& a, const Vec3& b);

/// Scalar constants and geometry of one system instance. Immutable once
/// validated; shared freely across threads.
struct SystemParams {
  double bandwidth_hz = 500e3;      // B
  double noise_power_w = 3.1623e-11;  // sigma^2 (-75 dBm)
  double eh_efficiency = 0.8;       // eta in (0,1]
  double cpu_energy_coeff = 1e-28;  // gamma_c, J s^2 / cycle^3
  double cycles_per_bit = 800;      // C
  double frame_s = 1.0;             // T
  double hap_tx_power_w = 10.0;     // P_E
  Vec3 hap_pos{0, 0, 0};
  Vec3 irs_pos{10, 0, 3};
  std::vector<Vec3> device_positions;  // length K
  double pathloss_exp_ad = 3.0;
  double pathloss_exp_ai = 2.2;
  double pathloss_exp_id = 2.2;
  double ref_gain = 1e-3;    // beta, linear power gain at 1 m (30 dB loss)
  double rician_factor = 2.0;
  int num_elements = 0;      // N; 0 means no IRS
  int num_devices = 1;       // K

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

struct BeamVector {
  CVec entries;
  ModulusMode mode = ModulusMode::UnitModulus;

  bool modulus_ok(double tol = 1e-12) const;
  static BeamVector unit(int n);  // all-ones (zero phases)
};

/// Beam vectors of a solution: v0 for WPT; v1 empty for Case 1 (v0 reused),
/// one vector for Case 2, K vectors for Case 3.
struct BeamSet {
  BeamVector v0;
  std::vector<BeamVector> v1;
};

/// Time/energy/frequency allocation. tau1 holds K per-device slots for TDMA
/// and a single shared slot for NOMA. power[k] is defined as 0 whenever the
/// slot is empty (removes the 0/0 of the e = tau*p substitution).
struct ResourceAllocation {
  double tau0 = 0;
  std::vector<double> tau1;
  std::vector<double> energy;  // e_k, joules
  std::vector<double> power;   // p_k, watts (derived)
  std::vector<double> freq;    // f_k, cycles/s
};

struct KktCertificate {
  std::vector<double> dual_energy;  // lambda_k >= 0 (scaled units)
  double dual_time = 0;             // mu >= 0
  double kkt_residual = 0;
};

struct Solution {
  double objective_bits = 0;
  ResourceAllocation alloc;
  BeamSet beams;
  DibfCase dibf = DibfCase::Case1;
  MaScheme ma = MaScheme::Tdma;
  KktCertificate kkt;
  std::vector<int> offload_active;  // K_off
  int iterations = 0;               // outer AO iterations taken
  std::vector<double> trace;        // pre-projection objective per iteration
};

} // namespace wpmec
