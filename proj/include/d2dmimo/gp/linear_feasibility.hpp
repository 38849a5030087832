#pragma once

#include <Eigen/Core>
#include <limits>

namespace d2dmimo::gp {

/// Find x with A x <= c and 0 <= x <= upper. Infinite upper entries mean
/// no upper bound; zero entries pin the variable to 0.
struct LinearFeasibilityProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  Eigen::VectorXd upper;

  int num_vars() const { return static_cast<int>(A.cols()); }
};

struct LpSettings {
  double feas_tol = 1e-9;
  double gap_tol = 1e-10;
  int max_newton_total = 5000;
};

struct LpResult {
  bool feasible = false;
  /// Witness when feasible, otherwise the minimizer of the worst violation.
  Eigen::VectorXd x;
  /// Minimum over the box of the largest row violation, rows scaled to unit
  /// norm. Negative values are a margin of strict feasibility; the solve stops
  /// at the first strictly feasible point, so only the sign is exact then.
  double margin = 0.0;
  int newton_steps = 0;
  /// Set when a row has (near) zero norm or the row scales span many decades.
  bool ill_conditioned = false;
};

/// Phase-1 max-violation minimization over the box, solved by the same
/// barrier kernel as the GP solver.
LpResult lp_feasible(const LinearFeasibilityProblem& lp, const LpSettings& settings = {});

}  // namespace d2dmimo::gp
