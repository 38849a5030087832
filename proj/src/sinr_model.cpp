#include "d2dmimo/sinr_model.hpp"

#include <algorithm>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace d2dmimo {

using gp::Monomial;
using gp::Posynomial;

std::optional<Monomial> PowerBinding::monomial(const Entry& e) const {
  if (e.is_variable()) return Monomial(p_max, {{e.var, 1.0}});
  if (e.value > 0.0) return Monomial(e.value);
  return std::nullopt;
}

PowerAllocation PowerBinding::realize(const Eigen::VectorXd& x) const {
  PowerAllocation a;
  a.p_max = p_max;
  auto fill = [&](const std::vector<Entry>& src, std::vector<double>& dst) {
    dst.clear();
    for (const auto& e : src) dst.push_back(std::clamp(value(e, x), 0.0, p_max));
  };
  fill(data_cu, a.data_cu);
  fill(data_d2d, a.data_d2d);
  fill(pilot_cu, a.pilot_cu);
  fill(pilot_d2d, a.pilot_d2d);
  return a;
}

Eigen::VectorXd PowerBinding::point_of(const PowerAllocation& alloc, int num_vars) const {
  Eigen::VectorXd x = Eigen::VectorXd::Ones(num_vars);
  auto put = [&](const std::vector<Entry>& src, const std::vector<double>& v) {
    for (std::size_t i = 0; i < src.size(); ++i)
      if (src[i].is_variable()) x(src[i].var) = v[i] / p_max;
  };
  put(data_cu, alloc.data_cu);
  put(data_d2d, alloc.data_d2d);
  put(pilot_cu, alloc.pilot_cu);
  put(pilot_d2d, alloc.pilot_d2d);
  return x;
}

PowerBinding bind_powers(gp::GeometricProgram& gp, const Network& net, const PowerAllocation& fixed, bool data_vars,
                         bool pilot_vars, double lower_frac) {
  fixed.validate(net.dims);
  PowerBinding pb;
  pb.p_max = net.p_max;
  const int K = net.dims.cus_per_cell;
  auto bind = [&](const std::vector<double>& values, bool as_var, const char* family, bool cu) {
    std::vector<PowerBinding::Entry> out;
    for (std::size_t i = 0; i < values.size(); ++i) {
      PowerBinding::Entry e;
      e.value = values[i];
      if (as_var) {
        const int idx = static_cast<int>(i);
        std::string name = std::string(family) + (cu ? "[" + std::to_string(idx / K) + "," + std::to_string(idx % K) + "]"
                                                     : "[" + std::to_string(idx) + "]");
        e.var = gp.add_variable(std::move(name), lower_frac, 1.0);
      }
      out.push_back(e);
    }
    return out;
  };
  pb.data_cu = bind(fixed.data_cu, data_vars, "p_c", true);
  pb.data_d2d = bind(fixed.data_d2d, data_vars, "p_d", false);
  pb.pilot_cu = bind(fixed.pilot_cu, pilot_vars, "pp_c", true);
  pb.pilot_d2d = bind(fixed.pilot_d2d, pilot_vars, "pp_d", false);
  return pb;
}

double SinrFraction::eval(const Eigen::VectorXd& x) const {
  if (!numerator) return 0.0;
  return numerator->eval(x) / denominator.eval(x);
}

namespace {

/// coef * prod(factors); skipped when any factor is a fixed zero.
void add_term(Posynomial& p, double coef, std::initializer_list<const std::optional<Monomial>*> factors) {
  if (!(coef > 0.0)) return;
  Monomial m(coef);
  for (const auto* f : factors) {
    if (!*f) return;
    m = m * **f;
  }
  p += m;
}

std::optional<Monomial> product(double coef, std::initializer_list<const std::optional<Monomial>*> factors) {
  Posynomial p;
  add_term(p, coef, factors);
  if (p.empty()) return std::nullopt;
  return p.terms().front();
}

struct Powers {
  std::vector<std::optional<Monomial>> pc, pd, ppc, ppd;

  explicit Powers(const PowerBinding& pb) {
    for (const auto& e : pb.data_cu) pc.push_back(pb.monomial(e));
    for (const auto& e : pb.data_d2d) pd.push_back(pb.monomial(e));
    for (const auto& e : pb.pilot_cu) ppc.push_back(pb.monomial(e));
    for (const auto& e : pb.pilot_d2d) ppd.push_back(pb.monomial(e));
  }
};

/// 1 + tau sum_{b'} p^{p,c}_{b',k} beta^{b,c}_{b',k}, optionally skipping one cell.
Posynomial cu_load(const Network& net, const Powers& w, int b, int k, int skip_cell = -1) {
  const int K = net.dims.cus_per_cell;
  const double tau = net.dims.pilot_len();
  Posynomial p = Posynomial::constant(1.0);
  for (int bp = 0; bp < net.dims.num_cells; ++bp)
    if (bp != skip_cell) add_term(p, tau * net.gains.cu_bs(b, bp, k), {&w.ppc[bp * K + k]});
  return p;
}

/// 1 + tau sum_{l' in N_i} p^{p,d}_{l'} beta^{b,d}_{l'}, optionally skipping one pair.
Posynomial set_load_bs(const Network& net, const Powers& w, int b, int i, int skip_pair = -1) {
  const double tau = net.dims.pilot_len();
  Posynomial p = Posynomial::constant(1.0);
  for (int l : net.pilots.sets[i])
    if (l != skip_pair) add_term(p, tau * net.gains.d2d_bs(b, l), {&w.ppd[l]});
  return p;
}

Posynomial multiply(const Posynomial& a, const Posynomial& b) {
  Posynomial p = a * b;
  p.compact();
  return p;
}

}  // namespace

SinrFraction cu_fraction_mr(const Network& net, const PowerBinding& pb, int b, int k) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int K = d.cus_per_cell;
  const double tau = d.pilot_len(), M = d.antennas_per_bs;
  const Powers w(pb);
  const int u = b * K + k;
  const double beta = g.cu_bs(b, b, k);

  SinrFraction f;
  f.numerator = product(M * tau * beta * beta, {&w.pc[u], &w.ppc[u]});
  Posynomial interference = Posynomial::constant(1.0);
  for (int bp = 0; bp < d.num_cells; ++bp)
    for (int kp = 0; kp < K; ++kp) add_term(interference, g.cu_bs(b, bp, kp), {&w.pc[bp * K + kp]});
  for (int l = 0; l < d.num_d2d_pairs; ++l) add_term(interference, g.d2d_bs(b, l), {&w.pd[l]});
  f.denominator = multiply(cu_load(net, w, b, k), interference);
  for (int bp = 0; bp < d.num_cells; ++bp) {
    if (bp == b) continue;
    const double bb = g.cu_bs(b, bp, k);
    add_term(f.denominator, M * tau * bb * bb, {&w.pc[bp * K + k], &w.ppc[bp * K + k]});
  }
  f.denominator.compact();
  return f;
}

SinrFraction cu_fraction_zf(const Network& net, const PowerBinding& pb, int b, int k, const Eigen::VectorXd& x0) {
  const auto& d = net.dims;
  if (!d.supports_zf()) throw std::invalid_argument("cu_fraction_zf: requires M > K + N");
  const auto& g = net.gains;
  const int B = d.num_cells, K = d.cus_per_cell;
  const double tau = d.pilot_len(), gain = d.zf_gain();
  const Powers w(pb);
  const int u = b * K + k;
  const double beta = g.cu_bs(b, b, k);

  SinrFraction f;
  f.numerator = product(gain * tau * beta * beta, {&w.pc[u], &w.ppc[u]});
  const Posynomial own_load = cu_load(net, w, b, k);
  Posynomial residual;
  for (int kpp = 0; kpp < K; ++kpp) {
    const Monomial bound = gp::monomial_lower_bound(cu_load(net, w, b, kpp), x0);
    for (int bpp = 0; bpp < B; ++bpp) {
      const auto& p = w.pc[bpp * K + kpp];
      if (!p) continue;
      const Monomial m = g.cu_bs(b, bpp, kpp) * *p / bound;
      residual += cu_load(net, w, b, kpp, bpp) * m;
    }
  }
  for (int l = 0; l < d.num_d2d_pairs; ++l) {
    if (!w.pd[l]) continue;
    const int i = net.pilots.d2d_pilot[l];
    const Monomial bound = gp::monomial_lower_bound(set_load_bs(net, w, b, i), x0);
    const Monomial m = g.d2d_bs(b, l) * *w.pd[l] / bound;
    residual += set_load_bs(net, w, b, i, l) * m;
  }
  residual.compact();
  f.denominator = own_load;
  if (!residual.empty()) f.denominator += multiply(own_load, residual);
  for (int bpp = 0; bpp < B; ++bpp) {
    if (bpp == b) continue;
    const double bb = g.cu_bs(b, bpp, k);
    add_term(f.denominator, gain * tau * bb * bb, {&w.pc[bpp * K + k], &w.ppc[bpp * K + k]});
  }
  f.denominator.compact();
  return f;
}

SinrFraction d2d_fraction(const Network& net, const PowerBinding& pb, int l) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int K = d.cus_per_cell;
  const double tau = d.pilot_len();
  const Powers w(pb);
  const double beta = g.d2d_d2d(l, l);
  const int i = net.pilots.d2d_pilot[l];

  SinrFraction f;
  f.numerator = product(tau * beta * beta, {&w.pd[l], &w.ppd[l]});
  Posynomial load = Posynomial::constant(1.0);
  Posynomial others = Posynomial::constant(1.0);
  for (int lp : net.pilots.sets[i]) {
    add_term(load, tau * g.d2d_d2d(l, lp), {&w.ppd[lp]});
    if (lp != l) add_term(others, tau * g.d2d_d2d(l, lp), {&w.ppd[lp]});
  }
  Posynomial interference = Posynomial::constant(1.0);
  for (int b = 0; b < d.num_cells; ++b)
    for (int k = 0; k < K; ++k) add_term(interference, g.cu_d2d(l, b, k), {&w.pc[b * K + k]});
  for (int lp = 0; lp < d.num_d2d_pairs; ++lp)
    if (lp != l) add_term(interference, g.d2d_d2d(l, lp), {&w.pd[lp]});
  f.denominator = multiply(load, interference);
  if (w.pd[l]) f.denominator += others * (beta * *w.pd[l]);
  f.denominator.compact();
  return f;
}

Eigen::VectorXd LinearSinrModel::sinr(const Eigen::VectorXd& p) const {
  return (num * p).array() / (1.0 + (den * p).array());
}

LinearSinrModel linear_sinr_model(const Network& net, const PowerAllocation& pilots, Processing proc) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  if (proc == Processing::ZF && !d.supports_zf()) throw std::invalid_argument("linear_sinr_model: ZF requires M > K + N");
  const int B = d.num_cells, K = d.cus_per_cell, L = d.num_d2d_pairs, BK = B * K;
  const auto q = compute_estimation_quality(net, pilots);
  LinearSinrModel m;
  m.num = Eigen::MatrixXd::Zero(BK + L, BK + L);
  m.den = Eigen::MatrixXd::Zero(BK + L, BK + L);
  const bool zf = proc == Processing::ZF;
  const double gain = zf ? d.zf_gain() : d.antennas_per_bs;
  for (int b = 0; b < B; ++b) {
    for (int k = 0; k < K; ++k) {
      const int u = b * K + k;
      m.num(u, u) = gain * q.cu_bs(b, b, k);
      for (int bp = 0; bp < B; ++bp) {
        for (int kp = 0; kp < K; ++kp) {
          m.den(u, bp * K + kp) += g.cu_bs(b, bp, kp) - (zf ? q.cu_bs(b, bp, kp) : 0.0);
        }
        if (bp != b) m.den(u, bp * K + k) += gain * q.cu_bs(b, bp, k);
      }
      for (int l = 0; l < L; ++l) m.den(u, BK + l) = g.d2d_bs(b, l) - (zf ? q.d2d_bs(b, l) : 0.0);
    }
  }
  for (int l = 0; l < L; ++l) {
    const int u = BK + l;
    m.num(u, u) = q.d2d_d2d(l, l);
    m.den(u, u) = g.d2d_d2d(l, l) - q.d2d_d2d(l, l);
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k) m.den(u, b * K + k) = g.cu_d2d(l, b, k);
    for (int lp = 0; lp < L; ++lp)
      if (lp != l) m.den(u, BK + lp) = g.d2d_d2d(l, lp);
  }
  return m;
}

double zf_surrogate_sinr(const Network& net, const PowerAllocation& alloc, const PowerAllocation& expansion, int b,
                         int k) {
  for (const auto* a : {&alloc, &expansion}) {
    for (const auto* v : {&a->data_cu, &a->data_d2d, &a->pilot_cu, &a->pilot_d2d})
      for (double p : *v)
        if (!(p > 0.0)) throw std::invalid_argument("zf_surrogate_sinr: powers must be positive");
  }
  gp::GeometricProgram scratch;
  const auto pb = bind_powers(scratch, net, alloc, true, true, 1e-300);
  const int n = scratch.num_vars();
  const auto f = cu_fraction_zf(net, pb, b, k, pb.point_of(expansion, n));
  return f.eval(pb.point_of(alloc, n));
}

}  // namespace d2dmimo
