#pragma once

#include <Eigen/Core>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "d2dmimo/gp/barrier.hpp"
#include "d2dmimo/gp/monomial.hpp"

namespace d2dmimo::gp {

/// minimize objective(x) s.t. f_i(x) <= 1, g_i(x) = 1, lower <= x <= upper.
struct GeometricProgram {
  Posynomial objective;
  std::vector<Posynomial> inequalities;
  std::vector<Monomial> equalities;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::string> names;

  static constexpr double kDefaultLower = 1e-30;
  static constexpr double kDefaultUpper = 1e30;

  int num_vars() const { return static_cast<int>(lower.size()); }
  int add_variable(std::string name = {}, double lo = kDefaultLower, double hi = kDefaultUpper);
  void add_inequality(Posynomial f) { inequalities.push_back(std::move(f)); }
  void add_equality(Monomial g) { equalities.push_back(std::move(g)); }

  /// Throws std::invalid_argument on empty posynomials, out-of-range variable
  /// indices or bounds that are not 0 < lo <= hi.
  void validate() const;
};

struct GpSettings {
  double tol = 1e-8;
  /// Relative constraint violation accepted in the returned point.
  double feas_tol = 1e-6;
  int max_newton = 500;
  int max_newton_total = 5000;
  double mu = 20.0;
};

enum class GpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(GpStatus s);

struct GpResult {
  GpStatus status = GpStatus::IterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int newton_steps = 0;
  /// Minimum of the phase-1 slack (in log space) when phase 1 ran.
  double phase1_slack = 0.0;
  bool phase1_ran = false;
};

/// Solves in log variables y = log x. Phase 1 is skipped when `start` is
/// strictly feasible for the inequalities and bounds.
GpResult gp_solve(const GeometricProgram& gp, const GpSettings& settings = {},
                  const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// Plain-text listing: one monomial per line as "coefficient var:exp ...",
/// grouped under headers.
void write_standard_form(const GeometricProgram& gp, std::ostream& os);

/// log-space convex form with bounds appended as affine constraints.
ConvexProblem to_convex(const GeometricProgram& gp);

}  // namespace d2dmimo::gp
