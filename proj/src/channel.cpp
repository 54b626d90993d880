// SPDX-License-Identifier: Apache-2.0
#include "wpmec/channel.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace wpmec {

namespace {

// Standard complex normal CN(0,1): independent real/imag parts of variance
// 1/2 each, via Box-Muller on raw uniform doubles. std::normal_distribution
// is implementation-defined, so it is avoided on purpose.
class ComplexGaussian {
 public:
  explicit ComplexGaussian(std::uint64_t seed) : eng_(seed) {}

  Complex next() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1));  // sqrt(2 * (1/2) * -ln u1)
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  double uniform() {
    // 53-bit mantissa from the raw 64-bit stream.
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  std::mt19937_64 eng_;
};

Complex rician_coeff(double beta, double dist, double alpha, double kappa,
                     Complex los_phase, ComplexGaussian& rng) {
  const double amp = std::sqrt(beta * std::pow(dist, -alpha));
  const Complex nlos = rng.next();
  const double w_los = std::sqrt(kappa / (kappa + 1.0));
  const double w_nlos = std::sqrt(1.0 / (kappa + 1.0));
  return amp * (w_los * los_phase + w_nlos * nlos);
}

// Direction cosine along the array axis (global x) from `from` to `to`.
double dir_cos_x(const Vec3& from, const Vec3& to) {
  const double d = distance(from, to);
  if (d == 0.0) return 0.0;
  return (to.x - from.x) / d;
}

Complex steer(int n, double u) {
  const double phase = std::numbers::pi * static_cast<double>(n) * u;
  return {std::cos(phase), std::sin(phase)};
}

} // namespace

ChannelRealization generate_channels(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  const int K = params.num_devices;
  const int N = params.num_elements;

  ChannelRealization chan;
  chan.seed = seed;
  ComplexGaussian rng(seed);

  chan.h_direct.resize(K);
  for (int k = 0; k < K; ++k) {
    const double d = distance(params.hap_pos, params.device_positions[k]);
    chan.h_direct[k] = rician_coeff(params.ref_gain, d, params.pathloss_exp_ad,
                                    params.rician_factor, Complex{1.0, 0.0}, rng);
  }

  chan.g_hap_irs = CVec(N);
  {
    const double d = distance(params.hap_pos, params.irs_pos);
    const double u = dir_cos_x(params.irs_pos, params.hap_pos);
    for (int n = 0; n < N; ++n) {
      chan.g_hap_irs[n] = rician_coeff(params.ref_gain, d, params.pathloss_exp_ai,
                                       params.rician_factor, steer(n, u), rng);
    }
  }

  chan.h_irs_device.resize(K);
  for (int k = 0; k < K; ++k) {
    const double d = distance(params.irs_pos, params.device_positions[k]);
    const double u = dir_cos_x(params.irs_pos, params.device_positions[k]);
    chan.h_irs_device[k] = CVec(N);
    for (int n = 0; n < N; ++n) {
      chan.h_irs_device[k][n] = rician_coeff(params.ref_gain, d, params.pathloss_exp_id,
                                             params.rician_factor, steer(n, u), rng);
    }
  }

  chan.q_cascaded = recompute_cascaded(chan);
  return chan;
}

std::vector<CVec> recompute_cascaded(const ChannelRealization& chan) {
  std::vector<CVec> q(chan.h_irs_device.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const auto& h = chan.h_irs_device[k];
    q[k] = CVec(h.size());
    for (Eigen::Index n = 0; n < h.size(); ++n)
      q[k][n] = std::conj(h[n]) * chan.g_hap_irs[n];
  }
  return q;
}

namespace {

using nlohmann::json;

json cvec_to_json(const CVec& v) {
  json arr = json::array();
  for (Eigen::Index n = 0; n < v.size(); ++n)
    arr.push_back({v[n].real(), v[n].imag()});
  return arr;
}

CVec cvec_from_json(const json& arr) {
  CVec v(arr.size());
  for (std::size_t n = 0; n < arr.size(); ++n)
    v[static_cast<Eigen::Index>(n)] = Complex(arr[n][0].get<double>(), arr[n][1].get<double>());
  return v;
}

} // namespace

std::string channel_to_json(const ChannelRealization& chan) {
  json j;
  j["schema_version"] = 1;
  j["seed"] = chan.seed;
  j["num_devices"] = chan.num_devices();
  j["num_elements"] = chan.num_elements();
  json hd = json::array();
  for (const auto& h : chan.h_direct) hd.push_back({h.real(), h.imag()});
  j["h_direct"] = hd;
  j["g_hap_irs"] = cvec_to_json(chan.g_hap_irs);
  json hr = json::array();
  for (const auto& h : chan.h_irs_device) hr.push_back(cvec_to_json(h));
  j["h_irs_device"] = hr;
  return j.dump(2);
}

ChannelRealization channel_from_json(const std::string& text) {
  json j = json::parse(text);
  if (j.value("schema_version", 0) != 1)
    throw std::runtime_error("unsupported channel file schema_version");
  ChannelRealization chan;
  chan.seed = j.value("seed", std::uint64_t{0});
  for (const auto& h : j.at("h_direct"))
    chan.h_direct.emplace_back(h[0].get<double>(), h[1].get<double>());
  chan.g_hap_irs = cvec_from_json(j.at("g_hap_irs"));
  for (const auto& h : j.at("h_irs_device"))
    chan.h_irs_device.push_back(cvec_from_json(h));
  if (static_cast<int>(chan.h_irs_device.size()) != chan.num_devices())
    throw std::runtime_error("channel file: h_irs_device length mismatch");
  chan.q_cascaded = recompute_cascaded(chan);
  return chan;
}

void save_channel(const ChannelRealization& chan, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << channel_to_json(chan);
}

ChannelRealization load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return channel_from_json(ss.str());
}

} // namespace wpmec
