#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "d2dmimo/estimation.hpp"
#include "d2dmimo/gp/geometric_program.hpp"
#include "d2dmimo/gp/monomial.hpp"
#include "d2dmimo/scenario.hpp"
#include "d2dmimo/spectral_efficiency.hpp"

namespace d2dmimo {

/// Maps every power of a PowerAllocation either to a fixed value or to a GP
/// variable x with power = p_max * x.
struct PowerBinding {
  struct Entry {
    int var = -1;
    double value = 0.0;
    bool is_variable() const { return var >= 0; }
  };

  std::vector<Entry> data_cu, data_d2d, pilot_cu, pilot_d2d;
  double p_max = 0.0;

  /// Monomial of the power; nullopt for a fixed zero.
  std::optional<gp::Monomial> monomial(const Entry& e) const;
  double value(const Entry& e, const Eigen::VectorXd& x) const { return e.is_variable() ? p_max * x(e.var) : e.value; }
  /// Allocation at the GP point x, clamped into [0, p_max].
  PowerAllocation realize(const Eigen::VectorXd& x) const;
  /// GP point reproducing `alloc` on the variable entries (values / p_max).
  Eigen::VectorXd point_of(const PowerAllocation& alloc, int num_vars) const;
};

/// Adds one variable per power of the selected families to `gp`, bounded to
/// [lower_frac, 1] (in units of p_max). The rest stay fixed at `fixed`.
PowerBinding bind_powers(gp::GeometricProgram& gp, const Network& net, const PowerAllocation& fixed,
                         bool data_vars, bool pilot_vars, double lower_frac = 1e-12);

/// SINR = numerator / denominator with both sides multiplied out into
/// monomial / posynomial form. `numerator` is empty when the desired signal
/// is identically zero.
struct SinrFraction {
  std::optional<gp::Monomial> numerator;
  gp::Posynomial denominator;

  double eval(const Eigen::VectorXd& x) const;
};

SinrFraction cu_fraction_mr(const Network& net, const PowerBinding& pb, int b, int k);
/// Residual-interference ratios use the monomial lower bound of each pilot
/// load around the GP point x0, so the fraction never exceeds the true ZF
/// SINR and touches it at x0. Exact when pilot powers are fixed.
SinrFraction cu_fraction_zf(const Network& net, const PowerBinding& pb, int b, int k, const Eigen::VectorXd& x0);
SinrFraction d2d_fraction(const Network& net, const PowerBinding& pb, int l);

/// With pilot powers fixed every SINR is (num . p) / (1 + den . p) over the
/// data powers p = [data_cu; data_d2d]. Row u is CU u for u < B*K, else D2D
/// pair u - B*K.
struct LinearSinrModel {
  Eigen::MatrixXd num;
  Eigen::MatrixXd den;

  Eigen::VectorXd sinr(const Eigen::VectorXd& p) const;
};

LinearSinrModel linear_sinr_model(const Network& net, const PowerAllocation& pilots, Processing proc);

/// Lower-bounded ZF SINR of CU (b,k) at `alloc`, with pilot-load bounds
/// expanded around `expansion`. All powers must be positive.
double zf_surrogate_sinr(const Network& net, const PowerAllocation& alloc, const PowerAllocation& expansion, int b,
                         int k);

}  // namespace d2dmimo
