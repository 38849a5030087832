#include "d2dmimo/gp/barrier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace d2dmimo::gp {

double LseFunction::value(const Eigen::VectorXd& y) const {
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> s(terms.size());
  for (std::size_t j = 0; j < terms.size(); ++j) {
    double v = terms[j].constant;
    for (const auto& [i, a] : terms[j].coeffs) v += a * y(i);
    s[j] = v;
    mx = std::max(mx, v);
  }
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : s) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// A function restricted to its support, coefficients indexed locally.
struct Compiled {
  std::vector<int> support;
  std::vector<double> constants;
  std::vector<std::vector<std::pair<int, double>>> coeffs;
  mutable std::vector<double> scratch;

  explicit Compiled(const LseFunction& f) {
    for (const auto& t : f.terms)
      for (const auto& [i, a] : t.coeffs) support.push_back(i);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    for (const auto& t : f.terms) {
      constants.push_back(t.constant);
      std::vector<std::pair<int, double>> local;
      for (const auto& [i, a] : t.coeffs) {
        const auto pos = std::lower_bound(support.begin(), support.end(), i) - support.begin();
        local.emplace_back(static_cast<int>(pos), a);
      }
      coeffs.push_back(std::move(local));
    }
    scratch.resize(constants.size());
  }

  double exponents(const Eigen::VectorXd& y) const {
    double mx = -kInf;
    for (std::size_t j = 0; j < constants.size(); ++j) {
      double v = constants[j];
      for (const auto& [li, a] : coeffs[j]) v += a * y(support[li]);
      scratch[j] = v;
      mx = std::max(mx, v);
    }
    return mx;
  }

  double value(const Eigen::VectorXd& y) const {
    const double mx = exponents(y);
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (double v : scratch) acc += std::exp(v - mx);
    return mx + std::log(acc);
  }

  /// Value, local gradient and local Hessian sum_j w_j a_j a_j^T - g g^T.
  double derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& g, Eigen::MatrixXd& h) const {
    const double mx = exponents(y);
    double acc = 0.0;
    for (double& v : scratch) {
      v = std::exp(v - mx);
      acc += v;
    }
    const auto m = static_cast<Eigen::Index>(support.size());
    g.setZero(m);
    h.setZero(m, m);
    for (std::size_t j = 0; j < constants.size(); ++j) {
      const double w = scratch[j] / acc;
      if (w == 0.0) continue;
      for (const auto& [li, a] : coeffs[j]) g(li) += w * a;
      if (constants.size() > 1) {
        for (const auto& [li, a] : coeffs[j])
          for (const auto& [lk, b] : coeffs[j]) h(li, lk) += w * a * b;
      }
    }
    if (constants.size() > 1) h -= g * g.transpose();
    return mx + std::log(acc);
  }
};

struct Barrier {
  const Compiled& objective;
  const std::vector<Compiled>& constraints;

  /// t * f0 - sum log(-f_i); +inf outside the strict interior.
  double value(const Eigen::VectorXd& y, double t) const {
    double v = t * objective.value(y);
    for (const auto& c : constraints) {
      const double f = c.value(y);
      if (!(f < 0.0)) return kInf;
      v -= std::log(-f);
    }
    return std::isfinite(v) ? v : kInf;
  }

  void derivatives(const Eigen::VectorXd& y, double t, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const auto n = y.size();
    grad.setZero(n);
    hess.setZero(n, n);
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    auto scatter = [&](const Compiled& c, double gw, double hw, double outer_w) {
      const auto m = static_cast<Eigen::Index>(c.support.size());
      for (Eigen::Index a = 0; a < m; ++a) {
        grad(c.support[a]) += gw * g(a);
        for (Eigen::Index b = 0; b < m; ++b) {
          hess(c.support[a], c.support[b]) += hw * h(a, b) + outer_w * g(a) * g(b);
        }
      }
    };
    objective.derivatives(y, g, h);
    scatter(objective, t, t, 0.0);
    for (const auto& c : constraints) {
      const double d = -c.derivatives(y, g, h);
      scatter(c, 1.0 / d, 1.0 / d, 1.0 / (d * d));
    }
  }
};

bool solve_newton(const Eigen::MatrixXd& hess, const Eigen::VectorXd& grad, Eigen::VectorXd& step) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
  if (ldlt.info() == Eigen::Success) {
    step = -ldlt.solve(grad);
    if (step.allFinite() && grad.dot(step) < 0.0) return true;
  }
  const double scale = std::max(1e-300, hess.diagonal().cwiseAbs().maxCoeff());
  for (double ridge = 1e-14 * scale; ridge < 1e6 * scale; ridge *= 100.0) {
    Eigen::MatrixXd reg = hess;
    reg.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> r(reg);
    if (r.info() != Eigen::Success) continue;
    step = -r.solve(grad);
    if (step.allFinite() && grad.dot(step) < 0.0) return true;
  }
  return false;
}

}  // namespace

BarrierResult barrier_minimize(const ConvexProblem& problem, const Eigen::VectorXd& y0,
                               const BarrierSettings& settings,
                               const std::function<bool(const Eigen::VectorXd&)>& stop) {
  const Compiled objective(problem.objective);
  std::vector<Compiled> constraints;
  constraints.reserve(problem.constraints.size());
  for (const auto& c : problem.constraints) constraints.emplace_back(c);
  const Barrier barrier{objective, constraints};

  BarrierResult res;
  res.y = y0;
  double t = settings.t0;
  if (!std::isfinite(barrier.value(res.y, t))) {
    res.status = BarrierStatus::NotStrictlyFeasible;
    res.objective = objective.value(res.y);
    return res;
  }
  const double m = static_cast<double>(constraints.size());
  Eigen::VectorXd grad, step;
  Eigen::MatrixXd hess;

  for (;;) {
    for (int it = 0; it < settings.max_newton_per_centering; ++it) {
      if (res.newton_steps >= settings.max_newton_total) {
        res.status = BarrierStatus::IterationLimit;
        res.objective = objective.value(res.y);
        res.gap = m / t;
        return res;
      }
      barrier.derivatives(res.y, t, grad, hess);
      if (!solve_newton(hess, grad, step)) break;
      const double slope = grad.dot(step);
      if (-slope / 2.0 <= settings.newton_tol) break;
      const double current = barrier.value(res.y, t);
      double s = 1.0;
      bool accepted = false;
      while (s > 1e-14) {
        const Eigen::VectorXd trial = res.y + s * step;
        const double v = barrier.value(trial, t);
        if (std::isfinite(v) && v <= current + 0.01 * s * slope) {
          res.y = trial;
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      ++res.newton_steps;
      if (!accepted) break;
      if (stop && stop(res.y)) {
        res.status = BarrierStatus::Stopped;
        res.objective = objective.value(res.y);
        res.gap = m / t;
        return res;
      }
    }
    if (m == 0.0 || m / t <= settings.gap_tol) break;
    t *= settings.mu;
  }
  res.status = BarrierStatus::Optimal;
  res.objective = objective.value(res.y);
  res.gap = m == 0.0 ? 0.0 : m / t;
  return res;
}

}  // namespace d2dmimo::gp
