// SPDX-License-Identifier: Apache-2.0
#include "wpmec/barrier.hpp"

#include <cmath>
#include <limits>

namespace wpmec {

namespace {

struct Eval {
  double psi = 0;   // t*f0 + barrier
  double f0 = 0;
  Vec grad;
  Mat hess;
  bool feasible = true;
  std::vector<double> cvals;
};

Eval evaluate(const ConvexProgram& prog, const Vec& x, double t, bool with_hess) {
  const int n = static_cast<int>(x.size());
  Eval ev;
  ev.grad = Vec::Zero(n);
  if (with_hess) ev.hess = Mat::Zero(n, n);

  Vec g(n);
  Mat h;
  if (with_hess) h = Mat::Zero(n, n);

  g.setZero();
  if (with_hess) h.setZero();
  ev.f0 = prog.objective(x, &g, with_hess ? &h : nullptr);
  ev.psi = t * ev.f0;
  ev.grad = t * g;
  if (with_hess) ev.hess = t * h;

  ev.cvals.reserve(prog.constraints.size());
  for (const auto& con : prog.constraints) {
    g.setZero();
    if (with_hess) h.setZero();
    const double c = con(x, &g, with_hess ? &h : nullptr);
    ev.cvals.push_back(c);
    if (c >= 0) {
      ev.feasible = false;
      ev.psi = std::numeric_limits<double>::infinity();
      return ev;
    }
    const double inv = 1.0 / (-c);
    ev.psi += -std::log(-c);
    ev.grad += inv * g;
    if (with_hess) ev.hess += inv * inv * g * g.transpose() + inv * h;
  }
  return ev;
}

double psi_only(const ConvexProgram& prog, const Vec& x, double t) {
  double psi = t * prog.objective(x, nullptr, nullptr);
  for (const auto& con : prog.constraints) {
    const double c = con(x, nullptr, nullptr);
    if (c >= 0) return std::numeric_limits<double>::infinity();
    psi += -std::log(-c);
  }
  return psi;
}

} // namespace

BarrierResult barrier_minimize(const ConvexProgram& prog, const Vec& x0,
                               const BarrierOptions& opts) {
  BarrierResult res;
  res.x = x0;
  const int m = static_cast<int>(prog.constraints.size());
  if (m == 0) {
    res.message = "no constraints; unsupported";
    return res;
  }
  {
    for (const auto& con : prog.constraints) {
      if (con(x0, nullptr, nullptr) >= 0) {
        res.message = "initial point not strictly feasible";
        return res;
      }
    }
  }

  double t = opts.t_init;
  Vec x = x0;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    // Centering: damped Newton.
    for (int it = 0; it < opts.max_newton; ++it) {
      Eval ev = evaluate(prog, x, t, true);
      // Regularize if the factorization struggles (flat directions).
      Eigen::LDLT<Mat> ldlt;
      double ridge = 0.0;
      Vec step;
      for (int tries = 0; tries < 6; ++tries) {
        Mat H = ev.hess;
        if (ridge > 0) H.diagonal().array() += ridge;
        ldlt.compute(H);
        if (ldlt.info() == Eigen::Success) {
          step = ldlt.solve(-ev.grad);
          if (step.allFinite()) break;
        }
        ridge = ridge == 0 ? 1e-10 * (1.0 + ev.hess.diagonal().cwiseAbs().maxCoeff())
                           : ridge * 100;
        step.resize(0);
      }
      if (step.size() == 0) break;

      const double decrement2 = -ev.grad.dot(step);  // lambda^2
      if (!(decrement2 > 0) || 0.5 * decrement2 < opts.newton_tol) break;

      // Backtracking line search on psi.
      double alpha = 1.0;
      const double slope = ev.grad.dot(step);
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vec cand = x + alpha * step;
        const double psi_new = psi_only(prog, cand, t);
        if (psi_new <= ev.psi + 0.25 * alpha * slope) {
          x = cand;
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!moved) break;
    }

    res.gap = static_cast<double>(m) / t;
    if (res.gap < opts.gap_tol) break;
    t *= opts.mu;
  }

  // Final certificate.
  Eval ev = evaluate(prog, x, t, false);
  res.x = x;
  res.objective = ev.f0;
  res.gap = static_cast<double>(m) / t;
  res.duals.resize(m);
  Vec stat = Vec::Zero(x.size());
  {
    Vec g(x.size());
    g.setZero();
    prog.objective(x, &g, nullptr);
    stat = g;
    for (int i = 0; i < m; ++i) {
      g.setZero();
      const double c = prog.constraints[i](x, &g, nullptr);
      res.duals[i] = 1.0 / (t * (-c));
      stat += res.duals[i] * g;
    }
  }
  res.kkt_residual = stat.lpNorm<Eigen::Infinity>() + res.gap;
  res.converged = res.gap < opts.gap_tol * 10;
  res.message = res.converged ? "ok" : "gap tolerance not reached";
  return res;
}

} // namespace wpmec
