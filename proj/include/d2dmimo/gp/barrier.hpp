#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

namespace d2dmimo::gp {

/// One exponent c + a^T y of a log-sum-exp function.
struct LseTerm {
  double constant = 0.0;
  std::vector<std::pair<int, double>> coeffs;  // sparse a, any order
};

/// f(y) = log sum_j exp(c_j + a_j^T y). With a single term f is affine,
/// which is how bounds and LP rows enter the same solver.
struct LseFunction {
  std::vector<LseTerm> terms;

  static LseFunction affine(double constant, std::vector<std::pair<int, double>> coeffs) {
    return LseFunction{{LseTerm{constant, std::move(coeffs)}}};
  }
  double value(const Eigen::VectorXd& y) const;
};

/// minimize f0(y) subject to f_i(y) <= 0, all f convex log-sum-exp.
struct ConvexProblem {
  int num_vars = 0;
  LseFunction objective;
  std::vector<LseFunction> constraints;
};

struct BarrierSettings {
  double mu = 20.0;
  double t0 = 1.0;
  /// Stop when m/t, the duality-gap bound, falls below this.
  double gap_tol = 1e-8;
  /// Newton decrement lambda^2/2 threshold for centering.
  double newton_tol = 1e-10;
  int max_newton_per_centering = 500;
  int max_newton_total = 5000;
};

enum class BarrierStatus { Optimal, Stopped, IterationLimit, NotStrictlyFeasible };

struct BarrierResult {
  BarrierStatus status = BarrierStatus::IterationLimit;
  Eigen::VectorXd y;
  double objective = 0.0;
  int newton_steps = 0;
  double gap = 0.0;
};

/// Log-barrier path following from a strictly feasible y0. `stop` is polled
/// after each Newton step; returning true ends the solve with status Stopped.
BarrierResult barrier_minimize(const ConvexProblem& problem, const Eigen::VectorXd& y0,
                               const BarrierSettings& settings,
                               const std::function<bool(const Eigen::VectorXd&)>& stop = {});

}  // namespace d2dmimo::gp
