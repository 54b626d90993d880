// SPDX-License-Identifier: Apache-2.0
#include "wpmec/types.hpp"

#include <cmath>
#include <stdexcept>

namespace wpmec {

const char* to_string(DibfCase c) {
  switch (c) {
    case DibfCase::Case1: return "case1";
    case DibfCase::Case2: return "case2";
    case DibfCase::Case3: return "case3";
  }
  return "?";
}

const char* to_string(MaScheme m) {
  return m == MaScheme::Tdma ? "tdma" : "noma";
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void SystemParams::validate() const {
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  req(bandwidth_hz > 0, "bandwidth must be positive");
  req(noise_power_w > 0, "noise power must be positive");
  req(eh_efficiency > 0 && eh_efficiency <= 1, "eta must be in (0,1]");
  req(cpu_energy_coeff > 0, "gamma_c must be positive");
  req(cycles_per_bit >= 1, "cycles per bit must be >= 1");
  req(frame_s > 0, "frame duration must be positive");
  req(hap_tx_power_w > 0, "HAP transmit power must be positive");
  req(num_elements >= 0, "element count must be nonnegative");
  req(num_devices >= 1, "at least one device required");
  req(static_cast<int>(device_positions.size()) == num_devices,
      "device position list must have K entries");
  req(ref_gain > 0, "reference gain must be positive");
  req(rician_factor >= 0, "Rician factor must be nonnegative");
}

bool BeamVector::modulus_ok(double tol) const {
  for (Eigen::Index n = 0; n < entries.size(); ++n) {
    const double m = std::abs(entries[n]);
    if (mode == ModulusMode::UnitModulus) {
      if (std::abs(m - 1.0) > tol) return false;
    } else {
      if (m > 1.0 + tol) return false;
    }
  }
  return true;
}

BeamVector BeamVector::unit(int n) {
  BeamVector v;
  v.entries = CVec::Ones(n);
  v.mode = ModulusMode::UnitModulus;
  return v;
}

} // namespace wpmec
