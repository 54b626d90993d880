// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wpmec/channel.hpp"
#include "wpmec/oracle.hpp"
#include "wpmec/resource_alloc.hpp"
#include "wpmec/single_user.hpp"

#include <cmath>
#include <stdexcept>

using namespace wpmec;

namespace {

SystemParams params_kn(int K, int N) {
  SystemParams p;
  p.num_devices = K;
  p.num_elements = N;
  p.device_positions.clear();
  for (int k = 0; k < K; ++k)
    p.device_positions.push_back({11.5 + 0.7 * k, 0.3 * k, 0.0});
  return p;
}

} // namespace

TEST_CASE("the brute force is a valid lower bound on the closed-form optimum") {
  const SystemParams p = params_kn(1, 1);
  const auto chan = generate_channels(p, 61);
  const Solution ref = solve_single_user(p, chan);
  OracleConfig cfg;
  cfg.phase_levels = 8;
  const OracleValue lo = brute_force_rate(p, chan, DibfCase::Case2,
                                          MaScheme::Tdma, cfg);
  CHECK(lo.bits <= ref.objective_bits * (1.0 + 1e-9));
  CHECK(lo.bits + lo.slack >= ref.objective_bits * (1.0 - 2e-2));

  cfg.phase_levels = 32;
  const OracleValue hi = brute_force_rate(p, chan, DibfCase::Case2,
                                          MaScheme::Tdma, cfg);
  CHECK(hi.bits >= lo.bits * (1.0 - 1e-12));
  // Finer phases close most of the remaining gap.
  CHECK(ref.objective_bits - hi.bits <= ref.objective_bits - lo.bits + 1e-9);
}

TEST_CASE("oracle agrees across multiple access on a shared-beam case") {
  const SystemParams p = params_kn(2, 1);
  const auto chan = generate_channels(p, 62);
  OracleConfig cfg;
  cfg.phase_levels = 12;
  cfg.grid_points = 9;
  cfg.refine_rounds = 3;
  const OracleValue t = brute_force_rate(p, chan, DibfCase::Case2,
                                         MaScheme::Tdma, cfg);
  const OracleValue n = brute_force_rate(p, chan, DibfCase::Case2,
                                         MaScheme::Noma, cfg);
  CHECK(std::abs(t.bits - n.bits) <= t.slack + n.slack + 1e-6 * t.bits);
}

TEST_CASE("the case ordering holds on oracle values") {
  const SystemParams p = params_kn(2, 1);
  const auto chan = generate_channels(p, 63);
  OracleConfig cfg;
  cfg.phase_levels = 12;
  const double c1 =
      brute_force_rate(p, chan, DibfCase::Case1, MaScheme::Tdma, cfg).bits;
  const double c2 =
      brute_force_rate(p, chan, DibfCase::Case2, MaScheme::Tdma, cfg).bits;
  const double c3 =
      brute_force_rate(p, chan, DibfCase::Case3, MaScheme::Tdma, cfg).bits;
  const double slack = 1e-3 * c2;
  CHECK(c2 >= c1 - slack);
  CHECK(c3 >= c2 - slack);
}

TEST_CASE("grid refinement tracks the interior-point allocation solve") {
  const SystemParams p = params_kn(2, 0);
  RaProblem prob;
  prob.params = &p;
  prob.gain_wpt = {1.3e-7, 5e-8};
  prob.gain_off = {1.3e-7, 5e-8};
  OracleConfig cfg;
  cfg.grid_points = 13;
  cfg.refine_rounds = 4;
  const OracleValue g = grid_refine_ra(prob, cfg);
  const RaResult r = solve_ra(prob);
  CHECK(g.bits <= r.objective_bits * (1.0 + 1e-9));
  CHECK(g.bits >= r.objective_bits * (1.0 - 1e-3));
}

TEST_CASE("more grid points never hurt at one round") {
  const SystemParams p = params_kn(2, 0);
  RaProblem prob;
  prob.params = &p;
  prob.gain_wpt = {1.3e-7, 5e-8};
  prob.gain_off = {1.3e-7, 5e-8};
  OracleConfig coarse;
  coarse.grid_points = 9;
  coarse.refine_rounds = 1;
  OracleConfig fine = coarse;
  fine.grid_points = 17;
  CHECK(grid_refine_ra(prob, fine).bits >=
        grid_refine_ra(prob, coarse).bits * (1.0 - 1e-12));
  // Extra rounds are monotone too.
  OracleConfig deep = coarse;
  deep.refine_rounds = 3;
  CHECK(grid_refine_ra(prob, deep).bits >=
        grid_refine_ra(prob, coarse).bits * (1.0 - 1e-12));
}

TEST_CASE("degenerate instances collapse to zero or local-only") {
  // Far below the activation threshold the optimum is local-only computing,
  // which the allocation grid hits exactly at its tau0 = T endpoint.
  SystemParams p = params_kn(1, 1);
  p.hap_tx_power_w = 1e-4;
  const auto chan = generate_channels(p, 64);
  OracleConfig cfg;
  cfg.phase_levels = 16;
  const double oracle =
      brute_force_rate(p, chan, DibfCase::Case2, MaScheme::Tdma, cfg).bits;
  const Solution ref = solve_single_user(p, chan);
  REQUIRE(ref.alloc.energy[0] == 0.0);  // local-only regime
  CHECK(oracle <= ref.objective_bits * (1.0 + 1e-9));
  CHECK(oracle >= ref.objective_bits * (1.0 - 1e-3));

  const SystemParams q = params_kn(2, 0);
  RaProblem prob;
  prob.params = &q;
  prob.gain_wpt = {1.3e-7, 5e-8};
  prob.gain_off = {0.0, 0.0};  // offloading impossible, local only
  const OracleValue g = grid_refine_ra(prob);
  const RaResult r = solve_ra(prob);
  CHECK(g.bits <= r.objective_bits * (1.0 + 1e-9));
  CHECK(g.bits >= r.objective_bits * (1.0 - 1e-3));
}

TEST_CASE("the brute force refuses instances beyond its guard") {
  const SystemParams big = params_kn(3, 1);
  const auto chan3 = generate_channels(big, 65);
  CHECK_THROWS_AS(brute_force_rate(big, chan3, DibfCase::Case2, MaScheme::Tdma),
                  std::invalid_argument);
  const SystemParams wide = params_kn(1, 4);
  const auto chanw = generate_channels(wide, 65);
  CHECK_THROWS_AS(brute_force_rate(wide, chanw, DibfCase::Case2, MaScheme::Tdma),
                  std::invalid_argument);
}

TEST_CASE("oracle runs are deterministic") {
  const SystemParams p = params_kn(1, 2);
  const auto chan = generate_channels(p, 66);
  OracleConfig cfg;
  cfg.phase_levels = 8;
  const OracleValue a = brute_force_rate(p, chan, DibfCase::Case2,
                                         MaScheme::Tdma, cfg);
  const OracleValue b = brute_force_rate(p, chan, DibfCase::Case2,
                                         MaScheme::Tdma, cfg);
  CHECK(a.bits == b.bits);
  CHECK(a.slack == b.slack);
}
