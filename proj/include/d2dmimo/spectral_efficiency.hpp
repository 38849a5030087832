#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2dmimo/estimation.hpp"
#include "d2dmimo/rng.hpp"
#include "d2dmimo/scenario.hpp"

namespace d2dmimo {

enum class Processing { MR, ZF };

std::string to_string(Processing p);
/// Accepts "mr" / "zf" (case-insensitive). Throws std::invalid_argument.
Processing processing_from_string(const std::string& s);

/// SINR split into a desired part and named non-negative interference terms.
/// Terms are normalized so that noise is 1 for CUs and D2D pairs alike.
struct SinrBreakdown {
  double numerator = 0.0;
  double noise = 0.0;
  double intra_cell = 0.0;
  double inter_cell = 0.0;
  double d2d_interference = 0.0;
  double coherent_contamination = 0.0;
  double estimation_error = 0.0;
  double sinr = 0.0;
  double se = 0.0;

  double denominator() const {
    return noise + intra_cell + inter_cell + d2d_interference + coherent_contamination + estimation_error;
  }
};

/// (1 - tau/tau_c) log2(1 + sinr). Throws on negative sinr.
double se_from_sinr(double sinr, const SystemDimensions& dims);

SinrBreakdown cu_sinr_mr(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q, int b,
                         int k);
SinrBreakdown cu_sinr_mr(const Network& net, const PowerAllocation& alloc, int b, int k);

/// Throws std::invalid_argument unless M > K + N.
SinrBreakdown cu_sinr_zf(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q, int b,
                         int k);
SinrBreakdown cu_sinr_zf(const Network& net, const PowerAllocation& alloc, int b, int k);

/// Approximate D2D SINR, numerator and denominator averaged separately.
/// `inter_cell` carries the cellular interference, intra_cell and
/// coherent_contamination are zero.
SinrBreakdown d2d_sinr_approx(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q,
                              int l);
SinrBreakdown d2d_sinr_approx(const Network& net, const PowerAllocation& alloc, int l);

/// Same quantity written over the pilot loads instead of gamma.
double d2d_sinr_approx_expanded(const Network& net, const PowerAllocation& alloc, int l);

/// Unnormalized MR denominator, product-plus-contamination form.
double mr_interference(const Network& net, const PowerAllocation& alloc, int b, int k);
/// Unnormalized ZF denominator with the residual ratio factors written out.
double zf_interference(const Network& net, const PowerAllocation& alloc, int b, int k);

/// Monte-Carlo average of the conditional-SINR bound for pair l. Estimates
/// sharing a pilot at receiver l share one Exp(1) magnitude draw.
double d2d_se_exact(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q, int l,
                    int num_samples, Rng& rng);
double d2d_se_exact(const Network& net, const PowerAllocation& alloc, int l, int num_samples, Rng& rng);

struct SEReport {
  Processing processing = Processing::MR;
  double prelog = 0.0;
  std::vector<SinrBreakdown> cu;   // B*K, index b*K + k
  std::vector<SinrBreakdown> d2d;  // L, approximate SINR
  std::vector<double> d2d_se_exact;  // empty unless requested

  std::vector<double> cu_se() const;
  std::vector<double> d2d_se_approx() const;
  /// Exact D2D SE when available, else approximate.
  double sum_se() const;
  double min_se() const;
};

/// `exact_samples` = 0 skips the Monte-Carlo D2D bound. Pair l draws from
/// derive_seed(seed, l).
SEReport evaluate_se(const Network& net, const PowerAllocation& alloc, Processing processing,
                     int exact_samples = 0, std::uint64_t seed = 0);

void to_json(nlohmann::json& j, const SinrBreakdown& s);
void to_json(nlohmann::json& j, const SEReport& r);
/// Columns: user_type,cell,index,sinr,se,numerator,noise,intra_cell,
/// inter_cell,d2d_interference,coherent_contamination,estimation_error
void write_report_csv(const SEReport& r, int cus_per_cell, std::ostream& out);

}  // namespace d2dmimo
