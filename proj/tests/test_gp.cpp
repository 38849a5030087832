#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "d2dmimo/gp/geometric_program.hpp"
#include "d2dmimo/gp/linear_feasibility.hpp"
#include "d2dmimo/gp/monomial.hpp"
#include "gp_checks.hpp"

using namespace d2dmimo;
using namespace d2dmimo::gp;
using gpcheck::var;

namespace {

// Zooming log-space grid search over a box for a GP with one inequality.
double grid_oracle(const GeometricProgram& gp) {
  const int n = gp.num_vars();
  std::vector<double> center(n), half(n);
  for (int i = 0; i < n; ++i) {
    center[i] = 0.5 * (std::log(gp.lower[i]) + std::log(gp.upper[i]));
    half[i] = 0.5 * (std::log(gp.upper[i]) - std::log(gp.lower[i]));
  }
  const int pts = 21;
  double best = INFINITY;
  std::vector<double> best_y = center;
  for (int round = 0; round < 60; ++round) {
    std::vector<int> idx(n, 0);
    for (;;) {
      Eigen::VectorXd x(n);
      std::vector<double> y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = std::clamp(center[i] + half[i] * (2.0 * idx[i] / (pts - 1) - 1.0), std::log(gp.lower[i]),
                          std::log(gp.upper[i]));
        x(i) = std::exp(y[i]);
      }
      bool ok = true;
      for (const auto& f : gp.inequalities) ok = ok && f.eval(x) <= 1.0;
      if (ok) {
        const double v = gp.objective.eval(x);
        if (v < best) {
          best = v;
          best_y = y;
        }
      }
      int i = 0;
      while (i < n && ++idx[i] == pts) idx[i++] = 0;
      if (i == n) break;
    }
    center = best_y;
    for (double& h : half) h *= 0.7;
  }
  return best;
}

}  // namespace

TEST_CASE("analytic geometric programs") {
  for (const auto& c : gpcheck::analytic_cases()) {
    CAPTURE(c.name);
    const auto r = gp_solve(c.gp);
    REQUIRE(r.status == GpStatus::Optimal);
    CHECK(std::abs(r.objective - c.objective) / c.objective < 1e-6);
    for (std::size_t i = 0; i < c.x.size(); ++i)
      CHECK(std::abs(r.x(static_cast<Eigen::Index>(i)) - c.x[i]) / c.x[i] < 1e-6);
  }
}

TEST_CASE("random three-variable GPs match a zooming grid search") {
  Rng rng(31);
  int compared = 0;
  for (int t = 0; t < 12; ++t) {
    GeometricProgram gp;
    for (int i = 0; i < 3; ++i) gp.add_variable("", 0.1, 10.0);
    gp.objective = gpcheck::random_posynomial(3, rng);
    Posynomial c = gpcheck::random_posynomial(3, rng);
    // Shift so the box center is feasible.
    Eigen::VectorXd mid = Eigen::VectorXd::Ones(3);
    c = (0.8 / c.eval(mid)) * c;
    gp.add_inequality(c);
    const auto r = gp_solve(gp);
    REQUIRE(r.status == GpStatus::Optimal);
    const double oracle = grid_oracle(gp);
    CAPTURE(t);
    CHECK(r.objective <= oracle * (1 + 1e-6));
    CHECK(std::abs(r.objective - oracle) / oracle < 1e-4);
    CHECK(c.eval(r.x) <= 1.0 + 1e-6);
    ++compared;
  }
  CHECK(compared == 12);
}

TEST_CASE("infeasible and unbounded programs are reported") {
  GeometricProgram inf;
  inf.add_variable();
  inf.objective = var(0);
  inf.add_inequality(2.0 * var(0, -1));  // x >= 2
  inf.add_inequality(var(0));            // x <= 1
  CHECK(gp_solve(inf).status == GpStatus::Infeasible);

  GeometricProgram unb;
  unb.add_variable();
  unb.add_variable();
  unb.objective = var(0) * var(1, -1);
  unb.add_inequality(var(1));
  CHECK(gp_solve(unb).status == GpStatus::Unbounded);

  GeometricProgram bad_eq;
  bad_eq.add_variable();
  bad_eq.objective = var(0);
  bad_eq.add_equality(var(0));
  bad_eq.add_equality(2.0 * var(0));
  CHECK(gp_solve(bad_eq).status == GpStatus::Infeasible);
}

TEST_CASE("returned point satisfies constraints and bounds") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    GeometricProgram gp;
    for (int i = 0; i < 4; ++i) gp.add_variable("", 1e-3, 1e3);
    gp.objective = gpcheck::random_posynomial(4, rng);
    for (int k = 0; k < 3; ++k) {
      Posynomial c = gpcheck::random_posynomial(4, rng);
      c = (0.5 / c.eval(Eigen::VectorXd::Ones(4))) * c;
      gp.add_inequality(c);
    }
    const auto r = gp_solve(gp);
    REQUIRE(r.status == GpStatus::Optimal);
    for (const auto& c : gp.inequalities) CHECK(c.eval(r.x) <= 1.0 + 1e-6);
    for (int i = 0; i < 4; ++i) {
      CHECK(r.x(i) >= 1e-3 * (1 - 1e-9));
      CHECK(r.x(i) <= 1e3 * (1 + 1e-9));
    }
  }
}

TEST_CASE("log-space Hessians are positive semidefinite at the solution") {
  Rng rng(17);
  for (int t = 0; t < 5; ++t) {
    GeometricProgram gp;
    for (int i = 0; i < 3; ++i) gp.add_variable("", 0.01, 100.0);
    gp.objective = gpcheck::random_posynomial(3, rng);
    Posynomial c = gpcheck::random_posynomial(3, rng);
    gp.add_inequality((0.5 / c.eval(Eigen::VectorXd::Ones(3))) * c);
    const auto r = gp_solve(gp);
    REQUIRE(r.status == GpStatus::Optimal);
    const ConvexProblem cp = to_convex(gp);
    const Eigen::VectorXd y = r.x.array().log();
    std::vector<const LseFunction*> fs{&cp.objective};
    for (const auto& f : cp.constraints) fs.push_back(&f);
    for (const LseFunction* f : fs) {
      Eigen::MatrixXd H(3, 3);
      const double h = 1e-4;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          Eigen::VectorXd pp = y, pm = y, mp = y, mm = y;
          pp(i) += h, pp(j) += h;
          pm(i) += h, pm(j) -= h;
          mp(i) -= h, mp(j) += h;
          mm(i) -= h, mm(j) -= h;
          H(i, j) = (f->value(pp) - f->value(pm) - f->value(mp) + f->value(mm)) / (4 * h * h);
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
      CHECK(es.eigenvalues().minCoeff() > -1e-5);
    }
  }
}

TEST_CASE("posynomial algebra stays closed and rejects signomials") {
  Rng rng(2);
  const Posynomial a = gpcheck::random_posynomial(3, rng);
  const Posynomial b = gpcheck::random_posynomial(3, rng);
  const Monomial m(2.5, {{0, 1.5}, {2, -1}});
  Eigen::VectorXd x(3);
  x << 0.7, 1.3, 2.1;
  const Posynomial sum = a + b, prod = a * b, quot = a / m;
  for (const auto* p : {&sum, &prod, &quot})
    for (const auto& t : p->terms()) CHECK(t.coefficient() > 0);
  CHECK(sum.eval(x) == doctest::Approx(a.eval(x) + b.eval(x)).epsilon(1e-12));
  CHECK(prod.eval(x) == doctest::Approx(a.eval(x) * b.eval(x)).epsilon(1e-12));
  CHECK(quot.eval(x) == doctest::Approx(a.eval(x) / m.eval(x)).epsilon(1e-12));
  CHECK_THROWS_AS(Monomial(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(Monomial(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Posynomial::constant(-2.0), std::invalid_argument);
  CHECK_THROWS_AS(-1.0 * a, std::invalid_argument);
  Posynomial dup({Monomial(1.0, {{0, 1}}), Monomial(2.0, {{0, 1}})});
  dup.compact();
  REQUIRE(dup.size() == 1);
  CHECK(dup.terms()[0].coefficient() == 3.0);
}

TEST_CASE("local monomial bound: bound, touch, tangent") {
  Rng rng(123);
  for (int t = 0; t < 100; ++t) {
    const auto r = gpcheck::lemma1_trio(3, rng);
    CHECK(r.bound_violation <= 1e-12);
    CHECK(r.touch_error < 1e-12);
    CHECK(r.tangent_error < 1e-6);
  }
  const Posynomial f(Monomial(1.0, {{0, 1}}));
  Eigen::VectorXd bad(1);
  bad << -1.0;
  CHECK_THROWS_AS(monomial_lower_bound(f, bad), std::invalid_argument);
}

TEST_CASE("linear feasibility on small examples") {
  LinearFeasibilityProblem lp;
  lp.A.resize(2, 2);
  lp.A << 1, 1, -1, 0;
  lp.c.resize(2);
  lp.c << 1, -0.5;
  lp.upper = Eigen::VectorXd::Ones(2);
  auto r = lp_feasible(lp);
  REQUIRE(r.feasible);
  CHECK(r.x(0) >= 0.5 - 1e-9);
  CHECK(r.x.sum() <= 1 + 1e-9);

  lp.A << 1, 1, -1, -1;
  lp.c << 1, -1.5;
  r = lp_feasible(lp);
  CHECK_FALSE(r.feasible);
  CHECK(r.margin > 0);

  // Unbounded variable needed to reach the target.
  lp.A.resize(1, 1);
  lp.A << -1;
  lp.c.resize(1);
  lp.c << -1e4;
  lp.upper.resize(1);
  lp.upper << std::numeric_limits<double>::infinity();
  CHECK(lp_feasible(lp).feasible);
  lp.upper << 1.0;
  CHECK_FALSE(lp_feasible(lp).feasible);
  lp.upper << 0.0;
  lp.c << 0.0;
  CHECK(lp_feasible(lp).feasible);
}

namespace {

// Feasibility of A x <= c, 0 <= x <= u by enumerating vertices of the box
// intersected with the rows (three variables).
bool vertex_feasible(const Eigen::MatrixXd& A, const Eigen::VectorXd& c, const Eigen::VectorXd& u) {
  std::vector<Eigen::RowVector3d> rows;
  std::vector<double> rhs;
  for (int i = 0; i < A.rows(); ++i) {
    rows.push_back(A.row(i));
    rhs.push_back(c(i));
  }
  for (int j = 0; j < 3; ++j) {
    Eigen::RowVector3d e = Eigen::RowVector3d::Zero();
    e(j) = 1;
    rows.push_back(e);
    rhs.push_back(u(j));
    rows.push_back(-e);
    rhs.push_back(0.0);
  }
  const int m = static_cast<int>(rows.size());
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int d = b + 1; d < m; ++d) {
        Eigen::Matrix3d S;
        S << rows[a], rows[b], rows[d];
        if (std::abs(S.determinant()) < 1e-12) continue;
        const Eigen::Vector3d x = S.fullPivLu().solve(Eigen::Vector3d(rhs[a], rhs[b], rhs[d]));
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) ok = rows[i].dot(x) <= rhs[i] + 1e-9 * (1 + rows[i].norm());
        if (ok) return true;
      }
  return false;
}

}  // namespace

TEST_CASE("linear feasibility agrees with vertex enumeration") {
  Rng rng(64);
  int agree = 0, decided = 0, feasible = 0;
  for (int t = 0; t < 60; ++t) {
    Eigen::MatrixXd big(10, 20);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 20; ++j) big(i, j) = rng.uniform(-1.0, 1.0);
    std::vector<int> cols{static_cast<int>(rng.index(20)), static_cast<int>(rng.index(20)),
                          static_cast<int>(rng.index(20))};
    LinearFeasibilityProblem lp;
    lp.A.resize(10, 3);
    for (int j = 0; j < 3; ++j) lp.A.col(j) = big.col(cols[j]);
    lp.c.resize(10);
    for (int i = 0; i < 10; ++i) lp.c(i) = rng.uniform(-0.25, 1.0);
    lp.upper = Eigen::Vector3d(1.0, 2.0, 1.5);
    const auto r = lp_feasible(lp);
    if (std::abs(r.margin) < 1e-6 && !r.feasible) continue;
    ++decided;
    feasible += r.feasible;
    agree += r.feasible == vertex_feasible(lp.A, lp.c, lp.upper);
  }
  CHECK(decided >= 50);
  CHECK(feasible > 5);
  CHECK(decided - feasible > 5);
  CHECK(agree == decided);
}

TEST_CASE("row scaling does not change the verdict") {
  Rng rng(8);
  for (int t = 0; t < 40; ++t) {
    LinearFeasibilityProblem lp;
    lp.A.resize(6, 4);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 4; ++j) lp.A(i, j) = rng.uniform(-1.0, 1.0);
    lp.c.resize(6);
    for (int i = 0; i < 6; ++i) lp.c(i) = rng.uniform(-0.5, 1.0);
    lp.upper = Eigen::VectorXd::Ones(4);
    const bool base = lp_feasible(lp).feasible;
    LinearFeasibilityProblem scaled = lp;
    for (int i = 0; i < 6; ++i) {
      const double s = std::pow(10.0, rng.uniform(-3.0, 3.0));
      scaled.A.row(i) *= s;
      scaled.c(i) *= s;
    }
    CHECK(lp_feasible(scaled).feasible == base);
  }
}

TEST_CASE("standard form listing") {
  GeometricProgram gp;
  gp.add_variable("x", 0.5, 2.0);
  gp.add_variable("y");
  gp.objective = Posynomial(var(0)) + Posynomial(Monomial(3.0, {{1, -2}}));
  gp.add_inequality(Monomial(0.25, {{0, 1}, {1, 1}}));
  gp.add_equality(var(0) * var(1, -1));
  std::ostringstream os;
  write_standard_form(gp, os);
  const std::string s = os.str();
  CHECK(s.find("variables 2") != std::string::npos);
  CHECK(s.find("var 0 x 0.5 2") != std::string::npos);
  CHECK(s.find("objective 2") != std::string::npos);
  CHECK(s.find("3 1:-2") != std::string::npos);
  CHECK(s.find("inequality 0 1\n0.25 0:1 1:1") != std::string::npos);
  CHECK(s.find("equality 0\n1 0:1 1:-1") != std::string::npos);
}
