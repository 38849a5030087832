#include "d2dmimo/gp/linear_feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "d2dmimo/gp/barrier.hpp"

namespace d2dmimo::gp {

LpResult lp_feasible(const LinearFeasibilityProblem& lp, const LpSettings& settings) {
  const int n = lp.num_vars();
  const auto rows = lp.A.rows();
  if (lp.c.size() != rows || lp.upper.size() != n) throw std::invalid_argument("lp_feasible: size mismatch");
  if (!lp.A.allFinite() || !lp.c.allFinite()) throw std::invalid_argument("lp_feasible: non-finite coefficients");
  if ((lp.upper.array() < 0.0).any() || lp.upper.hasNaN()) {
    throw std::invalid_argument("lp_feasible: upper bounds must be non-negative");
  }

  LpResult res;
  std::vector<int> active;
  for (int i = 0; i < n; ++i)
    if (lp.upper(i) > 0.0) active.push_back(i);
  const int na = static_cast<int>(active.size());
  // An open box keeps the barrier bounded; far beyond any meaningful witness.
  std::vector<double> cap(static_cast<std::size_t>(na));
  for (int j = 0; j < na; ++j) cap[j] = std::isfinite(lp.upper(active[j])) ? lp.upper(active[j]) : 1e15;

  ConvexProblem cp;
  cp.num_vars = na + 1;
  const int s = na;
  cp.objective = LseFunction::affine(0.0, {{s, 1.0}});
  double constant_violation = -HUGE_VAL;
  double min_norm = HUGE_VAL, max_norm = 0.0;
  std::vector<Eigen::VectorXd> row_a;
  std::vector<double> row_c;
  for (Eigen::Index r = 0; r < rows; ++r) {
    Eigen::VectorXd a(na);
    for (int j = 0; j < na; ++j) a(j) = lp.A(r, active[j]);
    const double norm = a.norm();
    if (norm < 1e-300) {
      res.ill_conditioned = true;
      constant_violation = std::max(constant_violation, -lp.c(r));
      continue;
    }
    min_norm = std::min(min_norm, norm);
    max_norm = std::max(max_norm, norm);
    a /= norm;
    const double c = lp.c(r) / norm;
    std::vector<std::pair<int, double>> coeffs;
    for (int j = 0; j < na; ++j)
      if (a(j) != 0.0) coeffs.emplace_back(j, a(j));
    coeffs.emplace_back(s, -1.0);
    cp.constraints.push_back(LseFunction::affine(-c, std::move(coeffs)));
    row_a.push_back(std::move(a));
    row_c.push_back(c);
  }
  if (max_norm > 0.0 && max_norm / min_norm > 1e12) res.ill_conditioned = true;
  for (int j = 0; j < na; ++j) {
    cp.constraints.push_back(LseFunction::affine(0.0, {{j, -1.0}}));
    cp.constraints.push_back(LseFunction::affine(-cap[j], {{j, 1.0}}));
  }
  cp.constraints.push_back(LseFunction::affine(-1.0, {{s, -1.0}}));

  Eigen::VectorXd w0(na + 1);
  for (int j = 0; j < na; ++j) w0(j) = std::isfinite(lp.upper(active[j])) ? 0.5 * cap[j] : 1.0;
  double worst = -HUGE_VAL;
  for (std::size_t r = 0; r < row_a.size(); ++r) worst = std::max(worst, row_a[r].dot(w0.head(na)) - row_c[r]);

  res.x = Eigen::VectorXd::Zero(n);
  if (row_a.empty()) {
    res.margin = std::isfinite(constant_violation) ? constant_violation : -1.0;
    for (int j = 0; j < na; ++j) res.x(active[j]) = w0(j);
    res.feasible = res.margin <= settings.feas_tol;
    return res;
  }
  w0(s) = std::max(worst, 0.0) + 1.0;

  BarrierSettings bs;
  bs.gap_tol = settings.gap_tol;
  bs.max_newton_total = settings.max_newton_total;
  const double tol = settings.feas_tol;
  auto stop = [s](const Eigen::VectorXd& w) { return w(s) < 0.0; };
  const auto r = barrier_minimize(cp, w0, bs, stop);
  res.newton_steps = r.newton_steps;
  for (int j = 0; j < na; ++j) res.x(active[j]) = std::clamp(r.y(j), 0.0, lp.upper(active[j]));
  double violation = -HUGE_VAL;
  for (std::size_t k = 0; k < row_a.size(); ++k) {
    Eigen::VectorXd xa(na);
    for (int j = 0; j < na; ++j) xa(j) = res.x(active[j]);
    violation = std::max(violation, row_a[k].dot(xa) - row_c[k]);
  }
  res.margin = std::max(violation, constant_violation);
  res.feasible = res.margin <= tol;
  return res;
}

}  // namespace d2dmimo::gp
