#include "d2dmimo/gp/geometric_program.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace d2dmimo::gp {

int GeometricProgram::add_variable(std::string name, double lo, double hi) {
  lower.push_back(lo);
  upper.push_back(hi);
  names.push_back(std::move(name));
  return num_vars() - 1;
}

void GeometricProgram::validate() const {
  const int n = num_vars();
  if (static_cast<int>(upper.size()) != n) throw std::invalid_argument("GeometricProgram: bound size mismatch");
  if (objective.empty()) throw std::invalid_argument("GeometricProgram: empty objective");
  if (objective.min_vars() > n) throw std::invalid_argument("GeometricProgram: objective uses unknown variable");
  for (const auto& f : inequalities) {
    if (f.empty()) throw std::invalid_argument("GeometricProgram: empty inequality posynomial");
    if (f.min_vars() > n) throw std::invalid_argument("GeometricProgram: inequality uses unknown variable");
  }
  for (const auto& g : equalities)
    if (g.min_vars() > n) throw std::invalid_argument("GeometricProgram: equality uses unknown variable");
  for (int i = 0; i < n; ++i) {
    if (!(lower[i] > 0.0) || !(upper[i] >= lower[i])) {
      throw std::invalid_argument("GeometricProgram: bounds must satisfy 0 < lo <= hi");
    }
  }
}

const char* to_string(GpStatus s) {
  switch (s) {
    case GpStatus::Optimal: return "optimal";
    case GpStatus::Infeasible: return "infeasible";
    case GpStatus::Unbounded: return "unbounded";
    case GpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

LseFunction to_lse(const Posynomial& f) {
  LseFunction out;
  out.terms.reserve(f.size());
  for (const auto& m : f.terms()) out.terms.push_back(LseTerm{std::log(m.coefficient()), m.exponents()});
  return out;
}

/// Substitutes y = y_p + F z into every term.
LseFunction substitute(const LseFunction& f, const Eigen::VectorXd& yp, const Eigen::MatrixXd& F) {
  LseFunction out;
  for (const auto& t : f.terms) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(F.cols());
    double c = t.constant;
    for (const auto& [i, v] : t.coeffs) {
      a += v * F.row(i).transpose();
      c += v * yp(i);
    }
    LseTerm nt{c, {}};
    const double scale = a.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < a.size(); ++j)
      if (std::abs(a(j)) > 1e-14 * scale) nt.coeffs.emplace_back(static_cast<int>(j), a(j));
    out.terms.push_back(std::move(nt));
  }
  return out;
}

}  // namespace

ConvexProblem to_convex(const GeometricProgram& gp) {
  ConvexProblem cp;
  cp.num_vars = gp.num_vars();
  cp.objective = to_lse(gp.objective);
  for (const auto& f : gp.inequalities) cp.constraints.push_back(to_lse(f));
  for (int i = 0; i < gp.num_vars(); ++i) {
    if (gp.lower[i] == gp.upper[i]) continue;
    cp.constraints.push_back(LseFunction::affine(-std::log(gp.upper[i]), {{i, 1.0}}));
    cp.constraints.push_back(LseFunction::affine(std::log(gp.lower[i]), {{i, -1.0}}));
  }
  return cp;
}

GpResult gp_solve(const GeometricProgram& gp, const GpSettings& settings, const std::optional<Eigen::VectorXd>& start) {
  gp.validate();
  const int n = gp.num_vars();
  GpResult res;
  ConvexProblem cp = to_convex(gp);

  // Monomial equalities, plus variables pinned by lo == hi: E y = r.
  std::vector<std::pair<std::vector<std::pair<int, double>>, double>> eq;
  for (const auto& g : gp.equalities) eq.emplace_back(g.exponents(), -std::log(g.coefficient()));
  for (int i = 0; i < n; ++i)
    if (gp.lower[i] == gp.upper[i]) eq.push_back({{{i, 1.0}}, std::log(gp.lower[i])});

  Eigen::VectorXd yp = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd F = Eigen::MatrixXd::Identity(n, n);
  const bool reduced = !eq.empty();
  if (reduced) {
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eq.size()), n);
    Eigen::VectorXd r(static_cast<Eigen::Index>(eq.size()));
    for (std::size_t k = 0; k < eq.size(); ++k) {
      for (const auto& [i, v] : eq[k].first) E(static_cast<Eigen::Index>(k), i) += v;
      r(static_cast<Eigen::Index>(k)) = eq[k].second;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-12);
    yp = svd.solve(r);
    if ((E * yp - r).norm() > 1e-9 * (1.0 + r.norm())) {
      res.status = GpStatus::Infeasible;
      res.x = yp.array().exp();
      return res;
    }
    const auto rank = svd.rank();
    F = svd.matrixV().rightCols(n - rank);
    cp.objective = substitute(cp.objective, yp, F);
    for (auto& c : cp.constraints) c = substitute(c, yp, F);
    cp.num_vars = static_cast<int>(F.cols());
  }
  const int nz = cp.num_vars;

  Eigen::VectorXd y0(n);
  bool have_start = false;
  if (start && start->size() == n && (start->array() > 0.0).all()) {
    y0 = start->array().log();
    have_start = true;
  }
  if (!have_start) {
    for (int i = 0; i < n; ++i) {
      const double lo = std::log(gp.lower[i]), hi = std::log(gp.upper[i]);
      y0(i) = (lo < 0.0 && hi > 0.0) ? 0.0 : 0.5 * (lo + hi);
    }
  }
  Eigen::VectorXd z0 = reduced ? Eigen::VectorXd(F.transpose() * (y0 - yp)) : y0;

  BarrierSettings bs;
  bs.mu = settings.mu;
  bs.gap_tol = settings.tol;
  bs.max_newton_per_centering = settings.max_newton;
  bs.max_newton_total = settings.max_newton_total;

  double worst = -HUGE_VAL;
  for (const auto& c : cp.constraints) worst = std::max(worst, c.value(z0));
  if (!(worst < 0.0)) {
    // Phase 1: minimize s with every term shifted by -s, s >= -1.
    res.phase1_ran = true;
    ConvexProblem p1;
    p1.num_vars = nz + 1;
    p1.objective = LseFunction::affine(0.0, {{nz, 1.0}});
    for (const auto& c : cp.constraints) {
      LseFunction shifted = c;
      for (auto& t : shifted.terms) t.coeffs.emplace_back(nz, -1.0);
      p1.constraints.push_back(std::move(shifted));
    }
    p1.constraints.push_back(LseFunction::affine(-1.0, {{nz, -1.0}}));
    Eigen::VectorXd w0(nz + 1);
    w0.head(nz) = z0;
    w0(nz) = std::isfinite(worst) ? worst + 1.0 : 1e3;
    if (!std::isfinite(worst)) {
      res.status = GpStatus::Infeasible;
      res.x = y0.array().exp();
      return res;
    }
    auto early = [nz](const Eigen::VectorXd& w) { return w(nz) < -0.5; };
    const auto r1 = barrier_minimize(p1, w0, bs, early);
    res.newton_steps += r1.newton_steps;
    res.phase1_slack = r1.y(nz);
    double check = -HUGE_VAL;
    for (const auto& c : cp.constraints) check = std::max(check, c.value(r1.y.head(nz)));
    if (!(check < 0.0)) {
      res.status = r1.status == BarrierStatus::IterationLimit ? GpStatus::IterationLimit : GpStatus::Infeasible;
      const Eigen::VectorXd y = reduced ? Eigen::VectorXd(yp + F * r1.y.head(nz)) : Eigen::VectorXd(r1.y.head(nz));
      res.x = y.array().exp();
      res.objective = gp.objective.eval(res.x);
      return res;
    }
    z0 = r1.y.head(nz);
  }

  bs.max_newton_total = std::max(1, settings.max_newton_total - res.newton_steps);
  const auto r2 = barrier_minimize(cp, z0, bs);
  res.newton_steps += r2.newton_steps;
  const Eigen::VectorXd y = reduced ? Eigen::VectorXd(yp + F * r2.y) : r2.y;
  res.x = y.array().exp();
  res.objective = gp.objective.eval(res.x);
  res.status = r2.status == BarrierStatus::Optimal ? GpStatus::Optimal : GpStatus::IterationLimit;
  if (res.status == GpStatus::Optimal) {
    for (int i = 0; i < n; ++i) {
      const bool default_hi = gp.upper[i] == GeometricProgram::kDefaultUpper;
      const bool default_lo = gp.lower[i] == GeometricProgram::kDefaultLower;
      if ((default_hi && y(i) > std::log(gp.upper[i]) - 2.0) || (default_lo && y(i) < std::log(gp.lower[i]) + 2.0)) {
        res.status = GpStatus::Unbounded;
      }
    }
  }
  return res;
}

void write_standard_form(const GeometricProgram& gp, std::ostream& os) {
  os << "variables " << gp.num_vars() << '\n';
  for (int i = 0; i < gp.num_vars(); ++i) {
    os << "var " << i << ' ' << (gp.names.size() > static_cast<std::size_t>(i) && !gp.names[i].empty() ? gp.names[i] : "-")
       << ' ' << gp.lower[i] << ' ' << gp.upper[i] << '\n';
  }
  os << "objective " << gp.objective.size() << '\n';
  for (const auto& m : gp.objective.terms()) os << m << '\n';
  for (std::size_t k = 0; k < gp.inequalities.size(); ++k) {
    os << "inequality " << k << ' ' << gp.inequalities[k].size() << '\n';
    for (const auto& m : gp.inequalities[k].terms()) os << m << '\n';
  }
  for (std::size_t k = 0; k < gp.equalities.size(); ++k) os << "equality " << k << '\n' << gp.equalities[k] << '\n';
}

}  // namespace d2dmimo::gp
