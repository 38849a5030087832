#pragma once

#include <Eigen/Core>
#include <ostream>
#include <utility>
#include <vector>

namespace d2dmimo::gp {

/// a * prod_i x_i^{b_i} with a > 0. Exponents are kept sorted by variable
/// index with zero entries dropped.
class Monomial {
 public:
  Monomial() = default;
  /// Throws std::invalid_argument unless coefficient is finite and positive.
  explicit Monomial(double coefficient, std::vector<std::pair<int, double>> exponents = {});

  static Monomial variable(int index, double power = 1.0);

  double coefficient() const { return coefficient_; }
  const std::vector<std::pair<int, double>>& exponents() const { return exponents_; }
  double exponent(int var) const;
  /// One past the largest variable index referenced.
  int min_vars() const { return exponents_.empty() ? 0 : exponents_.back().first + 1; }

  double eval(const Eigen::VectorXd& x) const;
  /// Gradient of the monomial at x (dense, size x.size()).
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  Monomial pow(double p) const;
  Monomial inverse() const { return pow(-1.0); }

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend Monomial operator/(const Monomial& a, const Monomial& b) { return a * b.inverse(); }
  friend Monomial operator*(double s, const Monomial& m);
  friend Monomial operator*(const Monomial& m, double s) { return s * m; }
  /// Same exponents (coefficients may differ).
  bool same_powers(const Monomial& o) const { return exponents_ == o.exponents_; }

 private:
  double coefficient_ = 1.0;
  std::vector<std::pair<int, double>> exponents_;
};

/// Sum of monomials. An empty posynomial is the zero function; the GP layer
/// rejects it where a posynomial must be strictly positive.
class Posynomial {
 public:
  Posynomial() = default;
  Posynomial(const Monomial& m) : terms_{m} {}  // NOLINT(google-explicit-constructor)
  explicit Posynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {}
  /// Constant posynomial. Throws unless c > 0.
  static Posynomial constant(double c) { return Posynomial(Monomial(c)); }

  const std::vector<Monomial>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  int min_vars() const;

  double eval(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  /// Merges terms with identical exponents.
  Posynomial& compact();

  Posynomial& operator+=(const Posynomial& o);
  Posynomial& operator+=(const Monomial& m);
  friend Posynomial operator+(Posynomial a, const Posynomial& b) { return a += b; }
  friend Posynomial operator*(const Posynomial& a, const Posynomial& b);
  friend Posynomial operator*(const Posynomial& a, const Monomial& m);
  friend Posynomial operator*(const Monomial& m, const Posynomial& a) { return a * m; }
  friend Posynomial operator/(const Posynomial& a, const Monomial& m) { return a * m.inverse(); }
  friend Posynomial operator*(double s, const Posynomial& a);

 private:
  std::vector<Monomial> terms_;
};

/// Best local monomial approximation at x0: prod_j (u_j(x)/Q_j)^{Q_j} with
/// Q_j = u_j(x0)/f(x0). It never exceeds f and touches it, with equal
/// gradient, at x0. Throws std::invalid_argument on non-positive x0 or empty f.
Monomial monomial_lower_bound(const Posynomial& f, const Eigen::VectorXd& x0);

std::ostream& operator<<(std::ostream& os, const Monomial& m);

}  // namespace d2dmimo::gp
