#include "d2dmimo/spectral_efficiency.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace d2dmimo {

std::string to_string(Processing p) { return p == Processing::MR ? "mr" : "zf"; }

Processing processing_from_string(const std::string& s) {
  std::string t;
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "mr") return Processing::MR;
  if (t == "zf") return Processing::ZF;
  throw std::invalid_argument("unknown processing '" + s + "' (expected mr or zf)");
}

double se_from_sinr(double sinr, const SystemDimensions& dims) {
  if (!(sinr >= 0.0)) throw std::invalid_argument("se_from_sinr: sinr must be non-negative");
  return dims.prelog() * std::log2(1.0 + sinr);
}

namespace {

void finish(SinrBreakdown& s, const SystemDimensions& dims) {
  s.sinr = s.numerator / s.denominator();
  s.se = se_from_sinr(s.sinr, dims);
}

}  // namespace

SinrBreakdown cu_sinr_mr(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q, int b,
                         int k) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int B = d.num_cells, K = d.cus_per_cell;
  const double M = d.antennas_per_bs;
  SinrBreakdown s;
  s.numerator = M * alloc.data_cu[b * K + k] * q.cu_bs(b, b, k);
  s.noise = 1.0;
  s.estimation_error = alloc.data_cu[b * K + k] * g.cu_bs(b, b, k);
  for (int bp = 0; bp < B; ++bp) {
    for (int kp = 0; kp < K; ++kp) {
      if (bp == b && kp == k) continue;
      const double term = alloc.data_cu[bp * K + kp] * g.cu_bs(b, bp, kp);
      (bp == b ? s.intra_cell : s.inter_cell) += term;
    }
    if (bp != b) s.coherent_contamination += M * alloc.data_cu[bp * K + k] * q.cu_bs(b, bp, k);
  }
  for (int l = 0; l < d.num_d2d_pairs; ++l) s.d2d_interference += alloc.data_d2d[l] * g.d2d_bs(b, l);
  finish(s, d);
  return s;
}

SinrBreakdown cu_sinr_mr(const Network& net, const PowerAllocation& alloc, int b, int k) {
  return cu_sinr_mr(net, alloc, compute_estimation_quality(net, alloc), b, k);
}

SinrBreakdown cu_sinr_zf(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q, int b,
                         int k) {
  const auto& d = net.dims;
  if (!d.supports_zf()) throw std::invalid_argument("cu_sinr_zf: requires M > K + N");
  const auto& g = net.gains;
  const int B = d.num_cells, K = d.cus_per_cell;
  const double gain = d.zf_gain();
  SinrBreakdown s;
  s.numerator = gain * alloc.data_cu[b * K + k] * q.cu_bs(b, b, k);
  s.noise = 1.0;
  for (int bp = 0; bp < B; ++bp) {
    for (int kp = 0; kp < K; ++kp) {
      const double residual = alloc.data_cu[bp * K + kp] * (g.cu_bs(b, bp, kp) - q.cu_bs(b, bp, kp));
      if (bp == b && kp == k) {
        s.estimation_error = residual;
      } else {
        (bp == b ? s.intra_cell : s.inter_cell) += residual;
      }
    }
    if (bp != b) s.coherent_contamination += gain * alloc.data_cu[bp * K + k] * q.cu_bs(b, bp, k);
  }
  for (int l = 0; l < d.num_d2d_pairs; ++l) {
    s.d2d_interference += alloc.data_d2d[l] * (g.d2d_bs(b, l) - q.d2d_bs(b, l));
  }
  finish(s, d);
  return s;
}

SinrBreakdown cu_sinr_zf(const Network& net, const PowerAllocation& alloc, int b, int k) {
  return cu_sinr_zf(net, alloc, compute_estimation_quality(net, alloc), b, k);
}

SinrBreakdown d2d_sinr_approx(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q,
                              int l) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int K = d.cus_per_cell;
  SinrBreakdown s;
  s.numerator = alloc.data_d2d[l] * q.d2d_d2d(l, l);
  s.noise = 1.0;
  s.estimation_error = alloc.data_d2d[l] * (g.d2d_d2d(l, l) - q.d2d_d2d(l, l));
  for (int b = 0; b < d.num_cells; ++b)
    for (int k = 0; k < K; ++k) s.inter_cell += alloc.data_cu[b * K + k] * g.cu_d2d(l, b, k);
  for (int lp = 0; lp < d.num_d2d_pairs; ++lp)
    if (lp != l) s.d2d_interference += alloc.data_d2d[lp] * g.d2d_d2d(l, lp);
  finish(s, d);
  return s;
}

SinrBreakdown d2d_sinr_approx(const Network& net, const PowerAllocation& alloc, int l) {
  return d2d_sinr_approx(net, alloc, compute_estimation_quality(net, alloc), l);
}

double d2d_sinr_approx_expanded(const Network& net, const PowerAllocation& alloc, int l) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int K = d.cus_per_cell;
  const double tau = d.pilot_len();
  const double beta = g.d2d_d2d(l, l);
  const double p = alloc.data_d2d[l];
  const double load = d2d_pilot_load_d2drx(net, alloc, l, net.pilots.d2d_pilot[l]);
  double others_on_pilot = 0.0;
  for (int lp : net.pilots.set_of(l))
    if (lp != l) others_on_pilot += tau * alloc.pilot_d2d[lp] * g.d2d_d2d(l, lp);
  double interference = 1.0;
  for (int b = 0; b < d.num_cells; ++b)
    for (int k = 0; k < K; ++k) interference += alloc.data_cu[b * K + k] * g.cu_d2d(l, b, k);
  for (int lp = 0; lp < d.num_d2d_pairs; ++lp)
    if (lp != l) interference += alloc.data_d2d[lp] * g.d2d_d2d(l, lp);
  const double num = tau * p * alloc.pilot_d2d[l] * beta * beta;
  return num / (load * interference + p * beta + p * beta * others_on_pilot);
}

double mr_interference(const Network& net, const PowerAllocation& alloc, int b, int k) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int K = d.cus_per_cell;
  const double tau = d.pilot_len();
  const double M = d.antennas_per_bs;
  double interference = 1.0;
  for (int bp = 0; bp < d.num_cells; ++bp)
    for (int kp = 0; kp < K; ++kp) interference += alloc.data_cu[bp * K + kp] * g.cu_bs(b, bp, kp);
  for (int l = 0; l < d.num_d2d_pairs; ++l) interference += alloc.data_d2d[l] * g.d2d_bs(b, l);
  double contamination = 0.0;
  for (int bp = 0; bp < d.num_cells; ++bp) {
    if (bp == b) continue;
    const double beta = g.cu_bs(b, bp, k);
    contamination += alloc.data_cu[bp * K + k] * alloc.pilot_cu[bp * K + k] * beta * beta;
  }
  return cu_pilot_load_bs(net, alloc, b, k) * interference + M * tau * contamination;
}

double zf_interference(const Network& net, const PowerAllocation& alloc, int b, int k) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int B = d.num_cells, K = d.cus_per_cell;
  const double tau = d.pilot_len();
  const double own_load = cu_pilot_load_bs(net, alloc, b, k);
  double cu_residual = 0.0;
  for (int kpp = 0; kpp < K; ++kpp) {
    const double load = cu_pilot_load_bs(net, alloc, b, kpp);
    for (int bpp = 0; bpp < B; ++bpp) {
      double others = 1.0;
      for (int bp = 0; bp < B; ++bp)
        if (bp != bpp) others += tau * alloc.pilot_cu[bp * K + kpp] * g.cu_bs(b, bp, kpp);
      cu_residual += others / load * alloc.data_cu[bpp * K + kpp] * g.cu_bs(b, bpp, kpp);
    }
  }
  double d2d_residual = 0.0;
  for (int l = 0; l < d.num_d2d_pairs; ++l) {
    const double load = d2d_pilot_load_bs(net, alloc, b, net.pilots.d2d_pilot[l]);
    double others = 1.0;
    for (int lp : net.pilots.set_of(l))
      if (lp != l) others += tau * alloc.pilot_d2d[lp] * g.d2d_bs(b, lp);
    d2d_residual += alloc.data_d2d[l] * g.d2d_bs(b, l) * others / load;
  }
  double contamination = 0.0;
  for (int bpp = 0; bpp < B; ++bpp) {
    if (bpp == b) continue;
    const double beta = g.cu_bs(b, bpp, k);
    contamination += tau * alloc.data_cu[bpp * K + k] * alloc.pilot_cu[bpp * K + k] * beta * beta;
  }
  return own_load + own_load * cu_residual + own_load * d2d_residual + d.zf_gain() * contamination;
}

double d2d_se_exact(const Network& net, const PowerAllocation& alloc, const EstimationQuality& q, int l,
                    int num_samples, Rng& rng) {
  if (num_samples < 1) throw std::invalid_argument("d2d_se_exact: num_samples must be >= 1");
  const auto& d = net.dims;
  const auto& g = net.gains;
  const int K = d.cus_per_cell, N = d.num_d2d_pilots;
  const double p = alloc.data_d2d[l];
  if (p == 0.0) return 0.0;

  // Denominator = base + sum_k cu_weight[k] xi_k + sum_i d2d_weight[i] xi_i.
  double base = 1.0 + p * (g.d2d_d2d(l, l) - q.d2d_d2d(l, l));
  std::vector<double> cu_weight(static_cast<std::size_t>(K), 0.0);
  std::vector<double> d2d_weight(static_cast<std::size_t>(N), 0.0);
  for (int b = 0; b < d.num_cells; ++b) {
    for (int k = 0; k < K; ++k) {
      const double pc = alloc.data_cu[b * K + k];
      base += pc * (g.cu_d2d(l, b, k) - q.cu_d2d(l, b, k));
      cu_weight[k] += pc * q.cu_d2d(l, b, k);
    }
  }
  for (int lp = 0; lp < d.num_d2d_pairs; ++lp) {
    if (lp == l) continue;
    const double pd = alloc.data_d2d[lp];
    base += pd * (g.d2d_d2d(l, lp) - q.d2d_d2d(l, lp));
    d2d_weight[net.pilots.d2d_pilot[lp]] += pd * q.d2d_d2d(l, lp);
  }
  const int own = net.pilots.d2d_pilot[l];
  const double signal = p * q.d2d_d2d(l, l);

  std::vector<double> xi_d2d(static_cast<std::size_t>(N));
  double acc = 0.0;
  for (int s = 0; s < num_samples; ++s) {
    double den = base;
    for (int k = 0; k < K; ++k) den += cu_weight[k] * rng.exponential();
    for (int i = 0; i < N; ++i) xi_d2d[i] = rng.exponential();
    for (int i = 0; i < N; ++i) den += d2d_weight[i] * xi_d2d[i];
    acc += std::log2(1.0 + signal * xi_d2d[own] / den);
  }
  return d.prelog() * acc / num_samples;
}

double d2d_se_exact(const Network& net, const PowerAllocation& alloc, int l, int num_samples, Rng& rng) {
  return d2d_se_exact(net, alloc, compute_estimation_quality(net, alloc), l, num_samples, rng);
}

std::vector<double> SEReport::cu_se() const {
  std::vector<double> out;
  for (const auto& s : cu) out.push_back(s.se);
  return out;
}

std::vector<double> SEReport::d2d_se_approx() const {
  std::vector<double> out;
  for (const auto& s : d2d) out.push_back(s.se);
  return out;
}

double SEReport::sum_se() const {
  double total = 0.0;
  for (const auto& s : cu) total += s.se;
  if (!d2d_se_exact.empty()) {
    for (double v : d2d_se_exact) total += v;
  } else {
    for (const auto& s : d2d) total += s.se;
  }
  return total;
}

double SEReport::min_se() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : cu) m = std::min(m, s.se);
  for (const auto& s : d2d) m = std::min(m, s.se);
  return m;
}

SEReport evaluate_se(const Network& net, const PowerAllocation& alloc, Processing processing, int exact_samples,
                     std::uint64_t seed) {
  const auto& d = net.dims;
  const auto q = compute_estimation_quality(net, alloc);
  SEReport r;
  r.processing = processing;
  r.prelog = d.prelog();
  for (int b = 0; b < d.num_cells; ++b) {
    for (int k = 0; k < d.cus_per_cell; ++k) {
      r.cu.push_back(processing == Processing::MR ? cu_sinr_mr(net, alloc, q, b, k)
                                                  : cu_sinr_zf(net, alloc, q, b, k));
    }
  }
  for (int l = 0; l < d.num_d2d_pairs; ++l) r.d2d.push_back(d2d_sinr_approx(net, alloc, q, l));
  if (exact_samples > 0) {
    for (int l = 0; l < d.num_d2d_pairs; ++l) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(l)));
      r.d2d_se_exact.push_back(d2d_se_exact(net, alloc, q, l, exact_samples, rng));
    }
  }
  return r;
}

void to_json(nlohmann::json& j, const SinrBreakdown& s) {
  j = nlohmann::json{{"numerator", s.numerator},
                     {"noise", s.noise},
                     {"intra_cell", s.intra_cell},
                     {"inter_cell", s.inter_cell},
                     {"d2d_interference", s.d2d_interference},
                     {"coherent_contamination", s.coherent_contamination},
                     {"estimation_error", s.estimation_error},
                     {"sinr", s.sinr},
                     {"se", s.se}};
}

void to_json(nlohmann::json& j, const SEReport& r) {
  j = nlohmann::json{{"processing", to_string(r.processing)},
                     {"prelog", r.prelog},
                     {"cu", r.cu},
                     {"d2d", r.d2d},
                     {"d2d_se_exact", r.d2d_se_exact}};
}

void write_report_csv(const SEReport& r, int cus_per_cell, std::ostream& out) {
  out << "user_type,cell,index,sinr,se,numerator,noise,intra_cell,inter_cell,d2d_interference,"
         "coherent_contamination,estimation_error\n";
  char buf[512];
  auto row = [&](const char* type, int cell, int index, const SinrBreakdown& s) {
    std::snprintf(buf, sizeof buf, "%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", type, cell,
                  index, s.sinr, s.se, s.numerator, s.noise, s.intra_cell, s.inter_cell, s.d2d_interference,
                  s.coherent_contamination, s.estimation_error);
    out << buf;
  };
  for (std::size_t u = 0; u < r.cu.size(); ++u) {
    row("cu", static_cast<int>(u) / cus_per_cell, static_cast<int>(u) % cus_per_cell, r.cu[u]);
  }
  for (std::size_t l = 0; l < r.d2d.size(); ++l) row("d2d", -1, static_cast<int>(l), r.d2d[l]);
}

}  // namespace d2dmimo
