#include "d2dmimo/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace d2dmimo {

PowerAllocation PowerAllocation::uniform(const Network& net, double level) {
  PowerAllocation a;
  const auto cus = static_cast<std::size_t>(net.dims.num_cus());
  const auto d2d = static_cast<std::size_t>(net.dims.num_d2d_pairs);
  a.data_cu.assign(cus, level);
  a.pilot_cu.assign(cus, level);
  a.data_d2d.assign(d2d, level);
  a.pilot_d2d.assign(d2d, level);
  a.p_max = net.p_max;
  return a;
}

void PowerAllocation::validate(const SystemDimensions& dims) const {
  const auto cus = static_cast<std::size_t>(dims.num_cus());
  const auto d2d = static_cast<std::size_t>(dims.num_d2d_pairs);
  if (data_cu.size() != cus || pilot_cu.size() != cus || data_d2d.size() != d2d || pilot_d2d.size() != d2d) {
    throw std::invalid_argument("PowerAllocation: size mismatch with dimensions");
  }
  // Solver output may overshoot the box by rounding.
  const double hi = p_max * (1.0 + 1e-9);
  for (const auto* v : {&data_cu, &data_d2d, &pilot_cu, &pilot_d2d}) {
    for (double p : *v) {
      if (!(p >= 0.0 && p <= hi)) throw std::invalid_argument("PowerAllocation: power outside [0, p_max]");
    }
  }
}

EstimationQuality::EstimationQuality(int num_cells, int cus_per_cell, int num_d2d, int num_pilots)
    : B_(num_cells),
      K_(cus_per_cell),
      L_(num_d2d),
      N_(num_pilots),
      cu_bs_(static_cast<std::size_t>(B_ * B_ * K_), 0.0),
      set_bs_(static_cast<std::size_t>(B_ * N_), 0.0),
      d2d_bs_(static_cast<std::size_t>(B_ * L_), 0.0),
      cu_d2d_(static_cast<std::size_t>(L_ * B_ * K_), 0.0),
      d2d_d2d_(static_cast<std::size_t>(L_ * L_), 0.0) {}

double cu_pilot_load_bs(const Network& net, const PowerAllocation& alloc, int bs, int k) {
  const int K = net.dims.cus_per_cell;
  const double tau = net.dims.pilot_len();
  double s = 0.0;
  for (int bp = 0; bp < net.dims.num_cells; ++bp) s += alloc.pilot_cu[bp * K + k] * net.gains.cu_bs(bs, bp, k);
  return 1.0 + tau * s;
}

double d2d_pilot_load_bs(const Network& net, const PowerAllocation& alloc, int bs, int i) {
  const double tau = net.dims.pilot_len();
  double s = 0.0;
  for (int l : net.pilots.sets[i]) s += alloc.pilot_d2d[l] * net.gains.d2d_bs(bs, l);
  return 1.0 + tau * s;
}

double cu_pilot_load_d2drx(const Network& net, const PowerAllocation& alloc, int rx, int k) {
  const int K = net.dims.cus_per_cell;
  const double tau = net.dims.pilot_len();
  double s = 0.0;
  for (int bp = 0; bp < net.dims.num_cells; ++bp) s += alloc.pilot_cu[bp * K + k] * net.gains.cu_d2d(rx, bp, k);
  return 1.0 + tau * s;
}

double d2d_pilot_load_d2drx(const Network& net, const PowerAllocation& alloc, int rx, int i) {
  const double tau = net.dims.pilot_len();
  double s = 0.0;
  for (int l : net.pilots.sets[i]) s += alloc.pilot_d2d[l] * net.gains.d2d_d2d(rx, l);
  return 1.0 + tau * s;
}

void compute_gamma_bs(const Network& net, const PowerAllocation& alloc, EstimationQuality& out) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const double tau = d.pilot_len();
  const int B = d.num_cells, K = d.cus_per_cell;
  for (int b = 0; b < B; ++b) {
    for (int k = 0; k < K; ++k) {
      const double load = cu_pilot_load_bs(net, alloc, b, k);
      for (int bp = 0; bp < B; ++bp) {
        const double beta = g.cu_bs(b, bp, k);
        out.cu_bs(b, bp, k) = tau * alloc.pilot_cu[bp * K + k] * beta * beta / load;
      }
    }
    for (int i = 0; i < d.num_d2d_pilots; ++i) {
      const double load = d2d_pilot_load_bs(net, alloc, b, i);
      double amp = 0.0;
      for (int l : net.pilots.sets[i]) {
        const double beta = g.d2d_bs(b, l);
        amp += std::sqrt(alloc.pilot_d2d[l]) * beta;
        out.d2d_bs(b, l) = tau * alloc.pilot_d2d[l] * beta * beta / load;
      }
      out.set_bs(b, i) = tau * amp * amp / load;
    }
  }
}

void compute_gamma_d2drx(const Network& net, const PowerAllocation& alloc, EstimationQuality& out) {
  const auto& d = net.dims;
  const auto& g = net.gains;
  const double tau = d.pilot_len();
  const int B = d.num_cells, K = d.cus_per_cell;
  for (int l = 0; l < d.num_d2d_pairs; ++l) {
    for (int k = 0; k < K; ++k) {
      const double load = cu_pilot_load_d2drx(net, alloc, l, k);
      for (int b = 0; b < B; ++b) {
        const double beta = g.cu_d2d(l, b, k);
        out.cu_d2d(l, b, k) = tau * alloc.pilot_cu[b * K + k] * beta * beta / load;
      }
    }
    for (int i = 0; i < d.num_d2d_pilots; ++i) {
      const double load = d2d_pilot_load_d2drx(net, alloc, l, i);
      for (int lp : net.pilots.sets[i]) {
        const double beta = g.d2d_d2d(l, lp);
        out.d2d_d2d(l, lp) = tau * alloc.pilot_d2d[lp] * beta * beta / load;
      }
    }
  }
}

EstimationQuality compute_estimation_quality(const Network& net, const PowerAllocation& alloc) {
  const auto& d = net.dims;
  EstimationQuality q(d.num_cells, d.cus_per_cell, d.num_d2d_pairs, d.num_d2d_pilots);
  compute_gamma_bs(net, alloc, q);
  compute_gamma_d2drx(net, alloc, q);
  return q;
}

std::pair<std::complex<double>, std::complex<double>> sample_estimate_and_error(double beta, double gamma,
                                                                                Rng& rng) {
  if (!(gamma >= 0.0) || gamma > beta) {
    throw std::invalid_argument("sample_estimate_and_error: gamma must lie in [0, beta]");
  }
  const auto est = rng.complex_gaussian(gamma);
  const auto err = rng.complex_gaussian(beta - gamma);
  return {est, err};
}

void to_json(nlohmann::json& j, const PowerAllocation& a) {
  j = nlohmann::json{{"data_cu", a.data_cu},
                     {"data_d2d", a.data_d2d},
                     {"pilot_cu", a.pilot_cu},
                     {"pilot_d2d", a.pilot_d2d},
                     {"p_max", a.p_max}};
}

void from_json(const nlohmann::json& j, PowerAllocation& a) {
  j.at("data_cu").get_to(a.data_cu);
  j.at("data_d2d").get_to(a.data_d2d);
  j.at("pilot_cu").get_to(a.pilot_cu);
  j.at("pilot_d2d").get_to(a.pilot_d2d);
  j.at("p_max").get_to(a.p_max);
}

void to_json(nlohmann::json& j, const EstimationQuality& q) {
  const int B = q.num_cells(), K = q.cus_per_cell(), L = q.num_d2d(), N = q.num_pilots();
  nlohmann::json cu_bs = nlohmann::json::array(), set_bs = nlohmann::json::array(),
                 d2d_bs = nlohmann::json::array(), cu_d2d = nlohmann::json::array(),
                 d2d_d2d = nlohmann::json::array();
  for (int b = 0; b < B; ++b) {
    nlohmann::json per_bs = nlohmann::json::array();
    for (int bp = 0; bp < B; ++bp) {
      std::vector<double> row;
      for (int k = 0; k < K; ++k) row.push_back(q.cu_bs(b, bp, k));
      per_bs.push_back(row);
    }
    cu_bs.push_back(per_bs);
    std::vector<double> sets, pairs;
    for (int i = 0; i < N; ++i) sets.push_back(q.set_bs(b, i));
    for (int l = 0; l < L; ++l) pairs.push_back(q.d2d_bs(b, l));
    set_bs.push_back(sets);
    d2d_bs.push_back(pairs);
  }
  for (int l = 0; l < L; ++l) {
    nlohmann::json per_rx = nlohmann::json::array();
    for (int b = 0; b < B; ++b) {
      std::vector<double> row;
      for (int k = 0; k < K; ++k) row.push_back(q.cu_d2d(l, b, k));
      per_rx.push_back(row);
    }
    cu_d2d.push_back(per_rx);
    std::vector<double> row;
    for (int lp = 0; lp < L; ++lp) row.push_back(q.d2d_d2d(l, lp));
    d2d_d2d.push_back(row);
  }
  j = nlohmann::json{{"gamma_cu_bs", cu_bs},
                     {"gamma_set_bs", set_bs},
                     {"gamma_d2d_bs", d2d_bs},
                     {"gamma_cu_d2drx", cu_d2d},
                     {"gamma_d2d_d2drx", d2d_d2d}};
}

}  // namespace d2dmimo
