#include "d2dmimo/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace d2dmimo {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

void check_guard(const Network& net) {
  const auto& d = net.dims;
  const long load = static_cast<long>(d.antennas_per_bs) * (d.num_cus() + d.num_d2d_pairs);
  if (load > kOracleDimensionLimit) {
    throw std::invalid_argument("oracle: M*(K*B+L) exceeds the dimension guard");
  }
}

/// Moments of the combined signals z_{k,j} = a_k^H h_j for one BS.
struct Moments {
  Eigen::MatrixXcd sum_z;    // K x U
  Eigen::MatrixXd sum_abs2;  // K x U
  Eigen::VectorXd sum_noise; // K
  long n = 0;

  Moments(int K, int U) : sum_z(MatrixXcd::Zero(K, U)), sum_abs2(Eigen::MatrixXd::Zero(K, U)),
                          sum_noise(Eigen::VectorXd::Zero(K)) {}

  void add(const Moments& o) {
    sum_z += o.sum_z;
    sum_abs2 += o.sum_abs2;
    sum_noise += o.sum_noise;
    n += o.n;
  }
};

std::vector<double> user_data_powers(const Network&, const PowerAllocation& alloc) {
  std::vector<double> p(alloc.data_cu);
  p.insert(p.end(), alloc.data_d2d.begin(), alloc.data_d2d.end());
  return p;
}

SinrBreakdown uatf_terms(const Network& net, const std::vector<double>& p, const Moments& m, int b, int k) {
  const auto& d = net.dims;
  const int K = d.cus_per_cell, BK = d.num_cus();
  const double n = static_cast<double>(m.n);
  const int self = b * K + k;
  SinrBreakdown s;
  const double noise = m.sum_noise(k) / n;
  if (noise <= 0.0) {
    s.noise = 1.0;
    s.se = s.sinr = 0.0;
    return s;
  }
  for (int u = 0; u < static_cast<int>(p.size()); ++u) {
    const double mean_abs2 = std::norm(m.sum_z(k, u) / n);
    const double power = m.sum_abs2(k, u) / n;
    if (u == self) {
      s.numerator = p[u] * mean_abs2;
      s.estimation_error = p[u] * (power - mean_abs2);
    } else if (u >= BK) {
      s.d2d_interference += p[u] * power;
    } else if (u / K == b) {
      s.intra_cell += p[u] * power;
    } else if (u % K == k) {
      s.coherent_contamination += p[u] * mean_abs2;
      s.inter_cell += p[u] * (power - mean_abs2);
    } else {
      s.inter_cell += p[u] * power;
    }
  }
  s.numerator /= noise;
  s.estimation_error /= noise;
  s.intra_cell /= noise;
  s.inter_cell /= noise;
  s.d2d_interference /= noise;
  s.coherent_contamination /= noise;
  s.noise = 1.0;
  s.sinr = s.numerator / s.denominator();
  s.se = se_from_sinr(s.sinr, d);
  return s;
}

/// Simulates BS b. `build` maps (channels H, pilot observations per CU
/// pilot, per D2D pilot) to the M x K combining matrix.
template <typename Build>
std::vector<OracleResult> simulate_bs(const Network& net, const PowerAllocation& alloc, int b, int realizations,
                                      Rng& rng, Build build) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int M = d.antennas_per_bs, K = d.cus_per_cell, B = d.num_cells, L = d.num_d2d_pairs,
            N = d.num_d2d_pilots;
  const int U = B * K + L;
  const double tau = d.pilot_len();
  const auto p = user_data_powers(net, alloc);

  std::vector<double> beta(static_cast<std::size_t>(U));
  for (int bp = 0; bp < B; ++bp)
    for (int k = 0; k < K; ++k) beta[bp * K + k] = g.cu_bs(b, bp, k);
  for (int l = 0; l < L; ++l) beta[B * K + l] = g.d2d_bs(b, l);

  const int num_batches = std::min(20, realizations);
  std::vector<Moments> batches(static_cast<std::size_t>(num_batches), Moments(K, U));
  MatrixXcd H(M, U), Ycu(M, K), Yd(M, N);
  for (int r = 0; r < realizations; ++r) {
    for (int u = 0; u < U; ++u)
      for (int m = 0; m < M; ++m) H(m, u) = rng.complex_gaussian(beta[u]);
    for (int k = 0; k < K; ++k) {
      for (int m = 0; m < M; ++m) Ycu(m, k) = rng.complex_gaussian(1.0);
      for (int bp = 0; bp < B; ++bp) Ycu.col(k) += std::sqrt(tau * alloc.pilot_cu[bp * K + k]) * H.col(bp * K + k);
    }
    for (int i = 0; i < N; ++i) {
      for (int m = 0; m < M; ++m) Yd(m, i) = rng.complex_gaussian(1.0);
      for (int l : net.pilots.sets[i]) Yd.col(i) += std::sqrt(tau * alloc.pilot_d2d[l]) * H.col(B * K + l);
    }
    const MatrixXcd A = build(Ycu, Yd);
    const MatrixXcd Z = A.adjoint() * H;
    Moments& acc = batches[static_cast<std::size_t>(r % num_batches)];
    acc.sum_z += Z;
    acc.sum_abs2 += Z.cwiseAbs2();
    acc.sum_noise += A.colwise().squaredNorm().transpose();
    ++acc.n;
  }

  Moments total(K, U);
  for (const auto& m : batches) total.add(m);
  std::vector<OracleResult> out;
  for (int k = 0; k < K; ++k) {
    OracleResult res;
    res.breakdown = uatf_terms(net, p, total, b, k);
    res.realizations = realizations;
    if (num_batches > 1) {
      double s1 = 0.0, s2 = 0.0;
      for (const auto& m : batches) {
        const double v = uatf_terms(net, p, m, b, k).sinr;
        s1 += v;
        s2 += v * v;
      }
      const double mean = s1 / num_batches;
      const double var = std::max(0.0, (s2 - num_batches * mean * mean) / (num_batches - 1));
      res.sinr_stderr = std::sqrt(var / num_batches);
    }
    out.push_back(res);
  }
  return out;
}

/// LMMSE coefficient for the channel h from observation y = sum sqrt(tau p) h + w:
/// E[h y^*] / E[|y|^2], written from the second moments of the observation.
double lmmse_coefficient(double cross, double observation_power) { return cross / observation_power; }

}  // namespace

std::vector<OracleResult> oracle_uatf_mr(const Network& net, const PowerAllocation& alloc, int num_realizations,
                                         Rng& rng) {
  check_guard(net);
  if (num_realizations < 1) throw std::invalid_argument("oracle_uatf_mr: need at least one realization");
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int B = d.num_cells, K = d.cus_per_cell;
  const double tau = d.pilot_len();
  std::vector<OracleResult> out;
  for (int b = 0; b < B; ++b) {
    std::vector<double> coef(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
      double power = 1.0;
      for (int bp = 0; bp < B; ++bp) power += tau * alloc.pilot_cu[bp * K + k] * g.cu_bs(b, bp, k);
      coef[k] = lmmse_coefficient(std::sqrt(tau * alloc.pilot_cu[b * K + k]) * g.cu_bs(b, b, k), power);
    }
    auto build = [&](const MatrixXcd& Ycu, const MatrixXcd&) {
      MatrixXcd A(Ycu.rows(), K);
      for (int k = 0; k < K; ++k) A.col(k) = coef[k] * Ycu.col(k);
      return A;
    };
    auto res = simulate_bs(net, alloc, b, num_realizations, rng, build);
    out.insert(out.end(), res.begin(), res.end());
  }
  return out;
}

std::vector<OracleResult> oracle_zf(const Network& net, const PowerAllocation& alloc, int num_realizations,
                                    Rng& rng) {
  const auto& d = net.dims;
  if (!d.supports_zf()) throw std::invalid_argument("oracle_zf: requires M > K + N");
  check_guard(net);
  if (num_realizations < 1) throw std::invalid_argument("oracle_zf: need at least one realization");
  const auto& g = net.gains;
  const int B = d.num_cells, K = d.cus_per_cell, N = d.num_d2d_pilots;
  const double tau = d.pilot_len();

  int zero = 0, total = 0;
  for (double v : alloc.pilot_cu) zero += (v == 0.0), ++total;
  for (double v : alloc.pilot_d2d) zero += (v == 0.0), ++total;
  if (zero == total) {
    std::vector<OracleResult> out(static_cast<std::size_t>(d.num_cus()));
    for (auto& r : out) {
      r.breakdown.noise = 1.0;
      r.realizations = num_realizations;
    }
    return out;
  }
  if (zero > 0) throw std::invalid_argument("oracle_zf: ZF detector undefined with partially zero pilot powers");

  std::vector<OracleResult> out;
  for (int b = 0; b < B; ++b) {
    std::vector<double> coef(static_cast<std::size_t>(K + N)), gamma(static_cast<std::size_t>(K + N));
    for (int k = 0; k < K; ++k) {
      double power = 1.0;
      for (int bp = 0; bp < B; ++bp) power += tau * alloc.pilot_cu[bp * K + k] * g.cu_bs(b, bp, k);
      coef[k] = lmmse_coefficient(std::sqrt(tau * alloc.pilot_cu[b * K + k]) * g.cu_bs(b, b, k), power);
      gamma[k] = coef[k] * coef[k] * power;
    }
    for (int i = 0; i < N; ++i) {
      double power = 1.0, cross = 0.0;
      for (int l : net.pilots.sets[i]) {
        power += tau * alloc.pilot_d2d[l] * g.d2d_bs(b, l);
        cross += std::sqrt(tau * alloc.pilot_d2d[l]) * g.d2d_bs(b, l);
      }
      coef[K + i] = lmmse_coefficient(cross, power);
      gamma[K + i] = coef[K + i] * coef[K + i] * power;
    }
    auto build = [&](const MatrixXcd& Ycu, const MatrixXcd& Yd) {
      const auto M = Ycu.rows();
      MatrixXcd Hhat(M, K + N);
      for (int k = 0; k < K; ++k) Hhat.col(k) = coef[k] * Ycu.col(k);
      for (int i = 0; i < N; ++i) Hhat.col(K + i) = coef[K + i] * Yd.col(i);
      const MatrixXcd gram = Hhat.adjoint() * Hhat;
      MatrixXcd V = Hhat * gram.ldlt().solve(MatrixXcd::Identity(K + N, K + N));
      for (int c = 0; c < K + N; ++c) V.col(c) *= std::sqrt(gamma[c]);
      return MatrixXcd(V.leftCols(K));
    };
    auto res = simulate_bs(net, alloc, b, num_realizations, rng, build);
    out.insert(out.end(), res.begin(), res.end());
  }
  return out;
}

EstimationQuality oracle_estimation_quality(const Network& net, const PowerAllocation& alloc, int num_realizations,
                                            Rng& rng) {
  if (num_realizations < 1) throw std::invalid_argument("oracle_estimation_quality: need at least one realization");
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int B = d.num_cells, K = d.cus_per_cell, L = d.num_d2d_pairs, N = d.num_d2d_pilots;
  const int tau = d.pilot_len();
  const int U = B * K + L;

  // Orthogonal unit-modulus pilots: columns of the tau-point DFT. CU pilot k
  // is column k, D2D pilot i is column K + i.
  MatrixXcd phi(tau, tau);
  for (int t = 0; t < tau; ++t)
    for (int c = 0; c < tau; ++c) phi(t, c) = std::polar(1.0, 2.0 * std::numbers::pi * t * c / tau);
  std::vector<int> pilot_of(static_cast<std::size_t>(U));
  std::vector<double> pilot_power(static_cast<std::size_t>(U));
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      pilot_of[b * K + k] = k;
      pilot_power[b * K + k] = alloc.pilot_cu[b * K + k];
    }
  for (int l = 0; l < L; ++l) {
    pilot_of[B * K + l] = K + net.pilots.d2d_pilot[l];
    pilot_power[B * K + l] = alloc.pilot_d2d[l];
  }

  EstimationQuality q(B, K, L, N);
  // Receivers: BSs 0..B-1, then D2D receivers.
  for (int rx = 0; rx < B + L; ++rx) {
    std::vector<double> beta(static_cast<std::size_t>(U));
    for (int bp = 0; bp < B; ++bp)
      for (int k = 0; k < K; ++k) beta[bp * K + k] = rx < B ? g.cu_bs(rx, bp, k) : g.cu_d2d(rx - B, bp, k);
    for (int l = 0; l < L; ++l) beta[B * K + l] = rx < B ? g.d2d_bs(rx, l) : g.d2d_d2d(rx - B, l);

    // Second moments of each despread observation.
    std::vector<double> obs_power(static_cast<std::size_t>(tau), 1.0);
    for (int u = 0; u < U; ++u) obs_power[pilot_of[u]] += tau * pilot_power[u] * beta[u];
    std::vector<double> coef(static_cast<std::size_t>(U)), set_cross(static_cast<std::size_t>(N), 0.0);
    for (int u = 0; u < U; ++u) {
      coef[u] = lmmse_coefficient(std::sqrt(tau * pilot_power[u]) * beta[u], obs_power[pilot_of[u]]);
      if (u >= B * K) set_cross[pilot_of[u] - K] += std::sqrt(tau * pilot_power[u]) * beta[u];
    }

    std::vector<double> acc(static_cast<std::size_t>(U), 0.0), acc_set(static_cast<std::size_t>(N), 0.0);
    VectorXcd h(U), received(tau);
    for (int r = 0; r < num_realizations; ++r) {
      for (int u = 0; u < U; ++u) h(u) = rng.complex_gaussian(beta[u]);
      for (int t = 0; t < tau; ++t) received(t) = rng.complex_gaussian(1.0);
      for (int u = 0; u < U; ++u) received += std::sqrt(pilot_power[u]) * h(u) * phi.col(pilot_of[u]);
      // Despread: y_c = phi_c^H received / sqrt(tau) = sum sqrt(tau p) h + CN(0,1).
      const VectorXcd y = phi.adjoint() * received / std::sqrt(static_cast<double>(tau));
      for (int u = 0; u < U; ++u) acc[u] += std::norm(coef[u] * y(pilot_of[u]));
      for (int i = 0; i < N; ++i)
        acc_set[i] += std::norm(lmmse_coefficient(set_cross[i], obs_power[K + i]) * y(K + i));
    }
    const double n = num_realizations;
    for (int bp = 0; bp < B; ++bp)
      for (int k = 0; k < K; ++k) {
        const double v = acc[bp * K + k] / n;
        if (rx < B) q.cu_bs(rx, bp, k) = v; else q.cu_d2d(rx - B, bp, k) = v;
      }
    for (int l = 0; l < L; ++l) {
      const double v = acc[B * K + l] / n;
      if (rx < B) q.d2d_bs(rx, l) = v; else q.d2d_d2d(rx - B, l) = v;
    }
    if (rx < B)
      for (int i = 0; i < N; ++i) q.set_bs(rx, i) = acc_set[i] / n;
  }
  return q;
}

MeanEstimate wishart_inverse_diag_mean(int rows, int cols, int num_samples, Rng& rng) {
  if (rows <= cols || cols < 1 || num_samples < 2) {
    throw std::invalid_argument("wishart_inverse_diag_mean: need rows > cols >= 1 and >= 2 samples");
  }
  MatrixXcd Z(rows, cols);
  double s1 = 0.0, s2 = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) Z(r, c) = rng.complex_gaussian(1.0);
    const MatrixXcd inv = (Z.adjoint() * Z).inverse();
    const double v = inv.diagonal().real().mean();
    s1 += v;
    s2 += v * v;
  }
  MeanEstimate e;
  e.mean = s1 / num_samples;
  e.stderr_ = std::sqrt(std::max(0.0, (s2 - num_samples * e.mean * e.mean) / (num_samples - 1)) / num_samples);
  return e;
}

}  // namespace d2dmimo
