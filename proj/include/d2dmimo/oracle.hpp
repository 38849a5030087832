#pragma once

#include <vector>

#include "d2dmimo/estimation.hpp"
#include "d2dmimo/rng.hpp"
#include "d2dmimo/scenario.hpp"
#include "d2dmimo/spectral_efficiency.hpp"

namespace d2dmimo {

/// Link-level Monte-Carlo reference for the closed-form expressions. Every
/// routine simulates explicit fading vectors, pilot observations and
/// combining; nothing is taken from the closed-form module.

/// Largest M * (K*B + L) accepted by the vector oracles.
inline constexpr long kOracleDimensionLimit = 10000;

struct OracleResult {
  /// Use-and-then-forget terms from empirical moments, scaled so noise is 1.
  SinrBreakdown breakdown;
  double sinr_stderr = 0.0;
  int realizations = 0;
};

/// Empirical UatF SINR of every CU (index b*K + k) with MR combining.
/// Throws std::invalid_argument when the dimension guard is violated.
std::vector<OracleResult> oracle_uatf_mr(const Network& net, const PowerAllocation& alloc, int num_realizations,
                                         Rng& rng);

/// Same with V = H (H^H H)^{-1} D_gamma^{1/2}, H = [own-cell CU estimates,
/// D2D pilot-set estimates]. Throws when M <= K + N, when the guard is
/// violated, or when only some pilot powers are zero.
std::vector<OracleResult> oracle_zf(const Network& net, const PowerAllocation& alloc, int num_realizations,
                                    Rng& rng);

/// Empirical mean square of the MMSE estimates formed from pilot sequences
/// sent over scalar channels and despread at each receiver. set_bs holds the
/// estimate of the unweighted sum channel of each D2D pilot set.
EstimationQuality oracle_estimation_quality(const Network& net, const PowerAllocation& alloc, int num_realizations,
                                            Rng& rng);

struct MeanEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Mean of the diagonal of (Z^H Z)^{-1} for Z with i.i.d. CN(0,1) entries.
MeanEstimate wishart_inverse_diag_mean(int rows, int cols, int num_samples, Rng& rng);

}  // namespace d2dmimo
