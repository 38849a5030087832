#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <json.hpp>

#include "d2dmimo/rng.hpp"
#include "d2dmimo/scenario.hpp"

namespace d2dmimo {

/// Data and pilot powers in mW. CU entries are indexed b*K + k.
struct PowerAllocation {
  std::vector<double> data_cu;
  std::vector<double> data_d2d;
  std::vector<double> pilot_cu;
  std::vector<double> pilot_d2d;
  double p_max = 0.0;

  /// Every power at `level` (defaults to p_max of the network).
  static PowerAllocation uniform(const Network& net, double level);
  static PowerAllocation full(const Network& net) { return uniform(net, net.p_max); }

  /// Throws std::invalid_argument on size mismatch or entries outside [0, p_max].
  void validate(const SystemDimensions& dims) const;
};

/// Mean squares of the MMSE estimates. Every entry satisfies 0 <= gamma <= beta
/// against the matching LargeScaleGains entry.
class EstimationQuality {
 public:
  EstimationQuality() = default;
  EstimationQuality(int num_cells, int cus_per_cell, int num_d2d, int num_pilots);

  /// gamma^{b,c}_{b',k}: estimate at BS `bs` of CU k in cell `from_cell`.
  double& cu_bs(int bs, int from_cell, int k) { return cu_bs_[(bs * B_ + from_cell) * K_ + k]; }
  double cu_bs(int bs, int from_cell, int k) const { return cu_bs_[(bs * B_ + from_cell) * K_ + k]; }
  /// gamma^{b,N_i}: estimate at BS `bs` of the summed channel of pilot set i.
  double& set_bs(int bs, int i) { return set_bs_[bs * N_ + i]; }
  double set_bs(int bs, int i) const { return set_bs_[bs * N_ + i]; }
  /// gamma^{b,d}_l
  double& d2d_bs(int bs, int l) { return d2d_bs_[bs * L_ + l]; }
  double d2d_bs(int bs, int l) const { return d2d_bs_[bs * L_ + l]; }
  /// gamma^{l,c}_{b,k}
  double& cu_d2d(int rx, int cell, int k) { return cu_d2d_[(rx * B_ + cell) * K_ + k]; }
  double cu_d2d(int rx, int cell, int k) const { return cu_d2d_[(rx * B_ + cell) * K_ + k]; }
  /// gamma^{l,d}_{l'}
  double& d2d_d2d(int rx, int tx) { return d2d_d2d_[rx * L_ + tx]; }
  double d2d_d2d(int rx, int tx) const { return d2d_d2d_[rx * L_ + tx]; }

  int num_cells() const { return B_; }
  int cus_per_cell() const { return K_; }
  int num_d2d() const { return L_; }
  int num_pilots() const { return N_; }

 private:
  int B_ = 0, K_ = 0, L_ = 0, N_ = 0;
  std::vector<double> cu_bs_, set_bs_, d2d_bs_, cu_d2d_, d2d_d2d_;
};

/// 1 + tau * sum_{b'} p^{p,c}_{b',k} beta^{b,c}_{b',k}
double cu_pilot_load_bs(const Network& net, const PowerAllocation& alloc, int bs, int k);
/// 1 + tau * sum_{l in N_i} p^{p,d}_l beta^{b,d}_l
double d2d_pilot_load_bs(const Network& net, const PowerAllocation& alloc, int bs, int i);
/// 1 + tau * sum_{b'} p^{p,c}_{b',k} beta^{l,c}_{b',k}
double cu_pilot_load_d2drx(const Network& net, const PowerAllocation& alloc, int rx, int k);
/// 1 + tau * sum_{l' in N_i} p^{p,d}_{l'} beta^{l,d}_{l'}
double d2d_pilot_load_d2drx(const Network& net, const PowerAllocation& alloc, int rx, int i);

/// Fills the BS-side factors (cu_bs, set_bs, d2d_bs) of `out`.
void compute_gamma_bs(const Network& net, const PowerAllocation& alloc, EstimationQuality& out);
/// Fills the D2D-receiver-side factors (cu_d2d, d2d_d2d) of `out`.
void compute_gamma_d2drx(const Network& net, const PowerAllocation& alloc, EstimationQuality& out);
EstimationQuality compute_estimation_quality(const Network& net, const PowerAllocation& alloc);

/// Independent (estimate, error) draw with variances gamma and beta - gamma.
/// Throws std::invalid_argument if gamma is outside [0, beta].
std::pair<std::complex<double>, std::complex<double>> sample_estimate_and_error(double beta, double gamma,
                                                                                Rng& rng);

void to_json(nlohmann::json& j, const PowerAllocation& a);
void from_json(const nlohmann::json& j, PowerAllocation& a);
void to_json(nlohmann::json& j, const EstimationQuality& q);

}  // namespace d2dmimo
