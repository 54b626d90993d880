// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace wpmec {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One smooth scalar function x -> value with gradient and Hessian
/// accumulation. `hess` may be null when only first-order info is needed.
using SmoothFn = std::function<double(const Vec& x, Vec* grad, Mat* hess)>;

/// Convex program in standard form:
///   minimize f0(x)  s.t.  c_i(x) <= 0, i = 1..m
/// with all c_i convex and f0 convex and twice differentiable on the strictly
/// feasible set. Solved by a log-barrier path-following scheme with damped
/// Newton steps and backtracking line search.
struct ConvexProgram {
  SmoothFn objective;
  std::vector<SmoothFn> constraints;
};

struct BarrierOptions {
  double t_init = 1.0;
  double mu = 20.0;            // barrier parameter growth
  double gap_tol = 1e-11;      // stop when m/t below this
  double newton_tol = 1e-12;   // half squared Newton decrement
  int max_newton = 60;
  int max_outer = 40;
};

struct BarrierResult {
  Vec x;
  std::vector<double> duals;   // lambda_i = 1/(t * -c_i(x)) at the final center
  double objective = 0;
  double gap = 0;              // m/t
  double kkt_residual = 0;     // ||grad f0 + sum lambda_i grad c_i||_inf + gap
  bool converged = false;
  std::string message;
};

/// `x0` must be strictly feasible (all c_i(x0) < 0).
BarrierResult barrier_minimize(const ConvexProgram& prog, const Vec& x0,
                               const BarrierOptions& opts = {});

} // namespace wpmec
