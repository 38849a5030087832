#include "d2dmimo/gp/monomial.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace d2dmimo::gp {

namespace {

std::vector<std::pair<int, double>> normalize(std::vector<std::pair<int, double>> e) {
  std::sort(e.begin(), e.end());
  std::vector<std::pair<int, double>> out;
  for (const auto& [var, p] : e) {
    if (var < 0) throw std::invalid_argument("Monomial: negative variable index");
    if (!std::isfinite(p)) throw std::invalid_argument("Monomial: non-finite exponent");
    if (!out.empty() && out.back().first == var) {
      out.back().second += p;
    } else {
      out.emplace_back(var, p);
    }
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const auto& t) { return t.second == 0.0; }), out.end());
  return out;
}

}  // namespace

Monomial::Monomial(double coefficient, std::vector<std::pair<int, double>> exponents)
    : coefficient_(coefficient), exponents_(normalize(std::move(exponents))) {
  if (!(coefficient > 0.0) || !std::isfinite(coefficient)) {
    throw std::invalid_argument("Monomial: coefficient must be finite and positive");
  }
}

Monomial Monomial::variable(int index, double power) { return Monomial(1.0, {{index, power}}); }

double Monomial::exponent(int var) const {
  auto it = std::lower_bound(exponents_.begin(), exponents_.end(), std::make_pair(var, -HUGE_VAL));
  return it != exponents_.end() && it->first == var ? it->second : 0.0;
}

double Monomial::eval(const Eigen::VectorXd& x) const {
  double v = coefficient_;
  for (const auto& [var, p] : exponents_) v *= std::pow(x(var), p);
  return v;
}

Eigen::VectorXd Monomial::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  const double v = eval(x);
  for (const auto& [var, p] : exponents_) g(var) = p * v / x(var);
  return g;
}

Monomial Monomial::pow(double p) const {
  std::vector<std::pair<int, double>> e = exponents_;
  for (auto& t : e) t.second *= p;
  return Monomial(std::pow(coefficient_, p), std::move(e));
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  std::vector<std::pair<int, double>> e = a.exponents_;
  e.insert(e.end(), b.exponents_.begin(), b.exponents_.end());
  return Monomial(a.coefficient_ * b.coefficient_, std::move(e));
}

Monomial operator*(double s, const Monomial& m) { return Monomial(s * m.coefficient_, m.exponents_); }

int Posynomial::min_vars() const {
  int n = 0;
  for (const auto& t : terms_) n = std::max(n, t.min_vars());
  return n;
}

double Posynomial::eval(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.eval(x);
  return v;
}

Eigen::VectorXd Posynomial::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
  for (const auto& t : terms_) g += t.gradient(x);
  return g;
}

Posynomial& Posynomial::compact() {
  std::map<std::vector<std::pair<int, double>>, double> merged;
  std::vector<std::vector<std::pair<int, double>>> order;
  for (const auto& t : terms_) {
    auto [it, inserted] = merged.try_emplace(t.exponents(), 0.0);
    if (inserted) order.push_back(t.exponents());
    it->second += t.coefficient();
  }
  std::vector<Monomial> out;
  out.reserve(order.size());
  for (auto& e : order) out.emplace_back(merged[e], e);
  terms_ = std::move(out);
  return *this;
}

Posynomial& Posynomial::operator+=(const Posynomial& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  return *this;
}

Posynomial& Posynomial::operator+=(const Monomial& m) {
  terms_.push_back(m);
  return *this;
}

Posynomial operator*(const Posynomial& a, const Posynomial& b) {
  std::vector<Monomial> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a.terms_)
    for (const auto& y : b.terms_) out.push_back(x * y);
  return Posynomial(std::move(out));
}

Posynomial operator*(const Posynomial& a, const Monomial& m) {
  std::vector<Monomial> out;
  out.reserve(a.size());
  for (const auto& x : a.terms_) out.push_back(x * m);
  return Posynomial(std::move(out));
}

Posynomial operator*(double s, const Posynomial& a) {
  std::vector<Monomial> out;
  out.reserve(a.size());
  for (const auto& x : a.terms_) out.push_back(s * x);
  return Posynomial(std::move(out));
}

Monomial monomial_lower_bound(const Posynomial& f, const Eigen::VectorXd& x0) {
  if (f.empty()) throw std::invalid_argument("monomial_lower_bound: empty posynomial");
  if ((x0.array() <= 0.0).any()) throw std::invalid_argument("monomial_lower_bound: x0 must be positive");
  const double total = f.eval(x0);
  double log_coef = 0.0;
  std::vector<std::pair<int, double>> exps;
  for (const auto& u : f.terms()) {
    const double q = u.eval(x0) / total;
    if (q == 0.0) continue;
    log_coef += q * (std::log(u.coefficient()) - std::log(q));
    for (const auto& [var, p] : u.exponents()) exps.emplace_back(var, q * p);
  }
  return Monomial(std::exp(log_coef), std::move(exps));
}

std::ostream& operator<<(std::ostream& os, const Monomial& m) {
  os.precision(17);
  os << m.coefficient();
  for (const auto& [var, p] : m.exponents()) os << ' ' << var << ':' << p;
  return os;
}

}  // namespace d2dmimo::gp
