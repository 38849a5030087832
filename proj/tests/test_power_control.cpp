#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "d2dmimo/power_control.hpp"
#include "d2dmimo/sinr_model.hpp"
#include "test_util.hpp"

using namespace d2dmimo;

namespace {

const SystemDimensions kDesk{4, 32, 2, 4, 2, 200};

std::vector<double> sinr_of(const Network& net, const PowerAllocation& a, Processing proc) {
  const auto r = evaluate_se(net, a, proc);
  std::vector<double> v;
  for (const auto& s : r.cu) v.push_back(s.sinr);
  for (const auto& s : r.d2d) v.push_back(s.sinr);
  return v;
}

double min_se(const Network& net, const PowerAllocation& a, Processing proc) {
  const auto v = sinr_of(net, a, proc);
  return se_from_sinr(*std::min_element(v.begin(), v.end()), net.dims);
}

double sum_log_sinr(const Network& net, const PowerAllocation& a, Processing proc) {
  double s = 0;
  for (double x : sinr_of(net, a, proc)) s += std::log(x);
  return s;
}

void set_data(PowerAllocation& a, int u, double p) {
  const int BK = static_cast<int>(a.data_cu.size());
  (u < BK ? a.data_cu[u] : a.data_d2d[u - BK]) = p;
}

double get_data(const PowerAllocation& a, int u) {
  const int BK = static_cast<int>(a.data_cu.size());
  return u < BK ? a.data_cu[u] : a.data_d2d[u - BK];
}

// Max-min SE with full pilots from bisection over a clipped standard
// interference iteration p_u <- min(p_max, t p_u / SINR_u(p)).
double yates_maxmin(const Network& net, Processing proc) {
  const int n = net.dims.num_users();
  const PowerAllocation full = PowerAllocation::full(net);
  double hi = INFINITY;
  for (int u = 0; u < n; ++u) {
    PowerAllocation alone = full;
    std::fill(alone.data_cu.begin(), alone.data_cu.end(), 0.0);
    std::fill(alone.data_d2d.begin(), alone.data_d2d.end(), 0.0);
    set_data(alone, u, net.p_max);
    hi = std::min(hi, sinr_of(net, alone, proc)[u]);
  }
  double lo = 0.0;
  hi = se_from_sinr(hi, net.dims);
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double t = std::exp2(mid / net.dims.prelog()) - 1.0;
    PowerAllocation p = full;
    for (int u = 0; u < n; ++u) set_data(p, u, 1e-9 * net.p_max);
    bool ok = false;
    for (int step = 0; step < 20000; ++step) {
      const auto s = sinr_of(net, p, proc);
      double change = 0;
      bool meets = true;
      for (int u = 0; u < n; ++u) {
        meets = meets && s[u] >= t * (1 - 1e-9);
        const double next = std::min(net.p_max, t * get_data(p, u) / s[u]);
        change = std::max(change, std::abs(next - get_data(p, u)));
        set_data(p, u, next);
      }
      if (meets) {
        ok = true;
        break;
      }
      if (change < 1e-13 * net.p_max) break;
    }
    (ok ? lo : hi) = mid;
  }
  return lo;
}

// Zooming log-space grid search over the given power entries.
double grid_search(const Network& net, std::vector<double*> vars, const std::function<double()>& f, int pts,
                   int rounds) {
  const int n = static_cast<int>(vars.size());
  std::vector<double> center(n, std::log(net.p_max) - 3.0), half(n, 4.0);
  std::vector<double> best_y = center;
  double best = -INFINITY;
  for (int r = 0; r < rounds; ++r) {
    std::vector<int> idx(n, 0);
    for (;;) {
      std::vector<double> y(n);
      for (int i = 0; i < n; ++i) {
        y[i] = std::min(std::log(net.p_max), center[i] + half[i] * (2.0 * idx[i] / (pts - 1) - 1.0));
        *vars[i] = std::exp(y[i]);
      }
      const double v = f();
      if (v > best) {
        best = v;
        best_y = y;
      }
      int i = 0;
      while (i < n && ++idx[i] == pts) idx[i++] = 0;
      if (i == n) break;
    }
    center = best_y;
    for (double& h : half) h *= 0.6;
  }
  for (int i = 0; i < n; ++i) *vars[i] = std::exp(best_y[i]);
  return best;
}

void check_box(const PowerAllocation& a, double p_max) {
  for (const auto* v : {&a.data_cu, &a.data_d2d, &a.pilot_cu, &a.pilot_d2d})
    for (double p : *v) {
      CHECK(p >= 0.0);
      CHECK(p <= p_max);
    }
}

Network symmetric_cell(int M = 32) {
  Network net = testutil::manual_network({1, M, 2, 0, 0, 200});
  for (int k = 0; k < 2; ++k) net.gains.cu_bs(0, 0, k) = 0.05;
  return net;
}

}  // namespace

TEST_CASE("string conversions") {
  CHECK(objective_from_string("maxmin") == Objective::MaxMin);
  CHECK(objective_from_string("maxprod") == Objective::MaxProd);
  CHECK(variables_from_string("joint") == Variables::JointPilotData);
  CHECK_THROWS_AS(objective_from_string("sum"), std::invalid_argument);
  ControlProblemSpec spec;
  spec.processing = Processing::ZF;
  spec.objective = Objective::MaxProd;
  spec.variables = Variables::JointPilotData;
  CHECK(spec.id() == "zf_maxprod_joint");
}

TEST_CASE("single CU reaches its full-power SE") {
  Network net = testutil::manual_network({1, 16, 1, 0, 0, 200});
  net.gains.cu_bs(0, 0, 0) = 0.02;
  const auto full = PowerAllocation::full(net);
  const double se_full = min_se(net, full, Processing::MR);
  const auto r = maxmin_data(net, full, Processing::MR);
  CHECK(r.objective <= se_full + 1e-12);
  CHECK(r.objective >= se_full - 1e-3);
  const auto zf = maxmin_data(net, full, Processing::ZF);
  CHECK(zf.objective >= min_se(net, full, Processing::ZF) - 1e-3);
}

TEST_CASE("symmetric users share the full-power level") {
  const Network net = symmetric_cell();
  const auto full = PowerAllocation::full(net);
  const auto r = maxmin_data(net, full, Processing::MR);
  CHECK(std::abs(r.objective - min_se(net, full, Processing::MR)) <= 1e-3);
  const auto j = maxmin_joint_mr(net);
  CHECK(j.alloc.pilot_cu[0] == doctest::Approx(j.alloc.pilot_cu[1]).epsilon(1e-4));
  CHECK(j.alloc.data_cu[0] == doctest::Approx(j.alloc.data_cu[1]).epsilon(1e-4));
}

TEST_CASE("max-min bisection against an interference-function oracle") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Network net = testutil::drop_network(kDesk, seed);
    for (Processing proc : {Processing::MR, Processing::ZF}) {
      CAPTURE(seed);
      CAPTURE(to_string(proc));
      const auto r = maxmin_data(net, PowerAllocation::full(net), proc);
      const double oracle = yates_maxmin(net, proc);
      CHECK(std::abs(r.objective - oracle) <= 2e-3);
    }
  }
}

TEST_CASE("bisection bookkeeping and tightness") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Network net = testutil::drop_network(kDesk, seed);
    const auto full = PowerAllocation::full(net);
    ControlSettings s;
    const auto r = maxmin_data(net, full, Processing::MR, s);
    const double lu = maxmin_upper_bound(net, full, Processing::MR);
    REQUIRE(r.diag.status == SolveStatus::Optimal);
    CHECK(r.diag.iterations <= static_cast<int>(std::ceil(std::log2(lu / s.bisection_eps))));
    REQUIRE(!r.diag.interval_widths.empty());
    CHECK(r.diag.interval_widths[0] == doctest::Approx(lu / 2).epsilon(1e-12));
    for (std::size_t i = 1; i < r.diag.interval_widths.size(); ++i)
      CHECK(r.diag.interval_widths[i] == doctest::Approx(r.diag.interval_widths[i - 1] / 2).epsilon(1e-9));
    for (std::size_t i = 1; i < r.diag.objective_trace.size(); ++i)
      CHECK(r.diag.objective_trace[i] >= r.diag.objective_trace[i - 1]);

    CHECK(maxmin_data_feasible(net, full, Processing::MR, r.objective, s));
    CHECK_FALSE(maxmin_data_feasible(net, full, Processing::MR, r.objective + 2 * s.bisection_eps, s));
    const double achieved = min_se(net, r.alloc, Processing::MR);
    CHECK(std::abs(achieved - r.objective) <= s.bisection_eps);
    CHECK_FALSE(r.diag.active_constraints.empty());
    CHECK(r.objective >= min_se(net, full, Processing::MR));
    check_box(r.alloc, net.p_max);
  }
}

TEST_CASE("max-product single user and auxiliary tightness") {
  Network single = testutil::manual_network({1, 16, 1, 0, 0, 200});
  single.gains.cu_bs(0, 0, 0) = 0.02;
  const auto one = maxprod_data(single, PowerAllocation::full(single), Processing::MR);
  CHECK(one.alloc.data_cu[0] == doctest::Approx(200.0).epsilon(1e-6));

  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Network net = testutil::drop_network(kDesk, seed);
    for (Processing proc : {Processing::MR, Processing::ZF}) {
      const auto r = maxprod_data(net, PowerAllocation::full(net), proc);
      REQUIRE(r.diag.status == SolveStatus::Optimal);
      const auto s = sinr_of(net, r.alloc, proc);
      REQUIRE(r.aux.size() == r.aux_users.size());
      for (std::size_t i = 0; i < r.aux.size(); ++i)
        CHECK(testutil::rel(r.aux[i], s[r.aux_users[i]]) < 1e-6);
      check_box(r.alloc, net.p_max);
    }
  }
}

TEST_CASE("max-product data control against a grid search") {
  Network net = testutil::manual_network({1, 16, 1, 1, 1, 200});
  auto& g = net.gains;
  g.cu_bs(0, 0, 0) = 0.01;
  g.d2d_bs(0, 0) = 0.5;
  g.cu_d2d(0, 0, 0) = 0.8;
  g.d2d_d2d(0, 0) = 2.0;
  const auto full = PowerAllocation::full(net);
  const auto r = maxprod_data(net, full, Processing::MR);
  PowerAllocation a = full;
  const double oracle = grid_search(net, {&a.data_cu[0], &a.data_d2d[0]},
                                    [&] { return sum_log_sinr(net, a, Processing::MR); }, 41, 25);
  CHECK(r.objective >= oracle - 1e-3);
  CHECK(std::abs(r.objective - oracle) <= 1e-3);
}

TEST_CASE("joint control dominates data-only control") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Network net = testutil::drop_network(kDesk, seed);
    const auto full = PowerAllocation::full(net);
    const auto dmm = maxmin_data(net, full, Processing::MR);
    const auto jmm = maxmin_joint_mr(net);
    CHECK(jmm.objective >= dmm.objective - 1e-6);
    const auto dmp = maxprod_data(net, full, Processing::MR);
    const auto jmp = maxprod_joint_mr(net);
    CHECK(jmp.objective >= dmp.objective - 1e-6);
    check_box(jmm.alloc, net.p_max);
    check_box(jmp.alloc, net.p_max);
  }
}

TEST_CASE("joint MR control against a six-variable grid search") {
  Network net = testutil::manual_network({2, 16, 1, 1, 1, 200});
  auto& g = net.gains;
  g.cu_bs(0, 0, 0) = 0.05;
  g.cu_bs(0, 1, 0) = 0.004;
  g.cu_bs(1, 1, 0) = 0.03;
  g.cu_bs(1, 0, 0) = 0.006;
  g.d2d_bs(0, 0) = 0.02;
  g.d2d_bs(1, 0) = 0.01;
  g.cu_d2d(0, 0, 0) = 0.01;
  g.cu_d2d(0, 1, 0) = 0.02;
  g.d2d_d2d(0, 0) = 1.5;
  PowerAllocation a = PowerAllocation::full(net);
  std::vector<double*> vars{&a.data_cu[0], &a.data_cu[1], &a.data_d2d[0],
                            &a.pilot_cu[0], &a.pilot_cu[1], &a.pilot_d2d[0]};
  const auto mp = maxprod_joint_mr(net);
  const double mp_oracle = grid_search(net, vars, [&] { return sum_log_sinr(net, a, Processing::MR); }, 7, 30);
  CHECK(mp.objective >= mp_oracle - 1e-2);
  CHECK(std::abs(mp.objective - mp_oracle) <= 1e-2);
  const auto mm = maxmin_joint_mr(net);
  const double mm_oracle = grid_search(net, vars, [&] { return min_se(net, a, Processing::MR); }, 7, 30);
  CHECK(mm.objective >= mm_oracle - 1e-2);
  CHECK(std::abs(mm.objective - mm_oracle) <= 1e-2);
}

TEST_CASE("successive ZF loop: single user goes to full power") {
  Network net = testutil::manual_network({1, 8, 1, 0, 0, 200});
  net.gains.cu_bs(0, 0, 0) = 0.01;
  for (Objective obj : {Objective::MaxProd, Objective::MaxMin}) {
    const auto r = zf_joint_successive(net, obj);
    CHECK(r.diag.status == SolveStatus::Optimal);
    CHECK(r.alloc.data_cu[0] == doctest::Approx(200.0).epsilon(1e-6));
    CHECK(r.alloc.pilot_cu[0] == doctest::Approx(200.0).epsilon(1e-6));
  }
}

TEST_CASE("ZF surrogate bounds the true SINR and touches it at the expansion point") {
  Rng rng(12);
  const Network net = testutil::drop_network(kDesk, 6);
  auto random_alloc = [&] {
    PowerAllocation a = PowerAllocation::full(net);
    for (auto* v : {&a.data_cu, &a.data_d2d, &a.pilot_cu, &a.pilot_d2d})
      for (double& p : *v) p = rng.uniform(0.01, 1.0) * net.p_max;
    return a;
  };
  for (int t = 0; t < 20; ++t) {
    const PowerAllocation x0 = random_alloc();
    const PowerAllocation x = random_alloc();
    for (int b = 0; b < 4; ++b) {
      for (int k = 0; k < 2; ++k) {
        const double truth = cu_sinr_zf(net, x, b, k).sinr;
        CHECK(zf_surrogate_sinr(net, x, x0, b, k) <= truth * (1 + 1e-12));
        CHECK(zf_surrogate_sinr(net, x0, x0, b, k) == doctest::Approx(cu_sinr_zf(net, x0, b, k).sinr).epsilon(1e-12));
      }
    }
    // Tangency along each pilot power.
    for (int i = 0; i < 8; ++i) {
      PowerAllocation up = x0, dn = x0;
      const double h = 1e-4 * x0.pilot_cu[i];
      up.pilot_cu[i] += h;
      dn.pilot_cu[i] -= h;
      const double d_true = (cu_sinr_zf(net, up, 0, 0).sinr - cu_sinr_zf(net, dn, 0, 0).sinr) / (2 * h);
      const double d_sur = (zf_surrogate_sinr(net, up, x0, 0, 0) - zf_surrogate_sinr(net, dn, x0, 0, 0)) / (2 * h);
      CHECK(std::abs(d_true - d_sur) <= 1e-5 * std::max(1.0, std::abs(d_true)) + 1e-9);
    }
  }
}

TEST_CASE("successive ZF loop is monotone and keeps its iterate feasible") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Network net = testutil::drop_network(kDesk, seed);
    for (Objective obj : {Objective::MaxProd, Objective::MaxMin}) {
      const auto r = zf_joint_successive(net, obj);
      CAPTURE(seed);
      CHECK(r.diag.status == SolveStatus::Optimal);
      const auto& tr = r.diag.objective_trace;
      for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] >= tr[i - 1] - 1e-9 * (1 + std::abs(tr[i - 1])));
      CHECK(r.objective >= objective_value(net, PowerAllocation::full(net), Processing::ZF, obj) - 1e-9);
      check_box(r.alloc, net.p_max);
      if (obj == Objective::MaxProd && !r.aux.empty()) {
        const auto s = sinr_of(net, r.alloc, Processing::ZF);
        for (std::size_t i = 0; i < r.aux.size(); ++i) {
          const int u = r.aux_users[i];
          CHECK(r.aux[i] <= s[u] * (1 + 1e-6));
          if (u < net.dims.num_cus())
            CHECK(r.aux[i] <= zf_surrogate_sinr(net, r.alloc, r.alloc, u / 2, u % 2) * (1 + 1e-6));
        }
      }
    }
  }
}

TEST_CASE("successive ZF loop on a tiny instance stays below the global optimum") {
  Network net = testutil::manual_network({1, 8, 1, 1, 1, 200});
  auto& g = net.gains;
  g.cu_bs(0, 0, 0) = 0.02;
  g.d2d_bs(0, 0) = 0.3;
  g.cu_d2d(0, 0, 0) = 0.5;
  g.d2d_d2d(0, 0) = 2.0;
  const auto r = zf_joint_successive(net, Objective::MaxProd);
  PowerAllocation a = PowerAllocation::full(net);
  const double oracle =
      grid_search(net, {&a.data_cu[0], &a.data_d2d[0], &a.pilot_cu[0], &a.pilot_d2d[0]},
                  [&] { return sum_log_sinr(net, a, Processing::ZF); }, 9, 30);
  CHECK(r.objective <= oracle + 1e-6);
  CHECK(r.objective >= oracle - 1e-2);
}

namespace {

// Reverses CU order within every cell and the order of the D2D pairs.
Network permuted(const Network& net) {
  const auto& d = net.dims;
  const int B = d.num_cells, K = d.cus_per_cell, L = d.num_d2d_pairs;
  auto pk = [K](int k) { return K - 1 - k; };
  auto pl = [L](int l) { return L - 1 - l; };
  Network out = net;
  for (int b = 0; b < B; ++b) {
    for (int bp = 0; bp < B; ++bp)
      for (int k = 0; k < K; ++k) out.gains.cu_bs(b, bp, pk(k)) = net.gains.cu_bs(b, bp, k);
    for (int l = 0; l < L; ++l) out.gains.d2d_bs(b, pl(l)) = net.gains.d2d_bs(b, l);
  }
  for (int l = 0; l < L; ++l) {
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k) out.gains.cu_d2d(pl(l), b, pk(k)) = net.gains.cu_d2d(l, b, k);
    for (int lp = 0; lp < L; ++lp) out.gains.d2d_d2d(pl(l), pl(lp)) = net.gains.d2d_d2d(l, lp);
  }
  std::vector<int> pilot(L);
  for (int l = 0; l < L; ++l) pilot[pl(l)] = net.pilots.d2d_pilot[l];
  out.pilots = PilotAllocation::from_assignment(pilot, d.num_d2d_pilots);
  return out;
}

}  // namespace

TEST_CASE("relabeling users relabels the allocation") {
  const Network net = testutil::drop_network(kDesk, 9);
  const Network per = permuted(net);
  const int K = 2, L = 4;
  for (bool joint : {false, true}) {
    const auto a = joint ? maxprod_joint_mr(net) : maxprod_data(net, PowerAllocation::full(net), Processing::MR);
    const auto b = joint ? maxprod_joint_mr(per) : maxprod_data(per, PowerAllocation::full(per), Processing::MR);
    CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-7));
    for (int c = 0; c < 4; ++c)
      for (int k = 0; k < K; ++k) {
        CHECK(std::abs(b.alloc.data_cu[c * K + K - 1 - k] - a.alloc.data_cu[c * K + k]) <= 1e-4 * net.p_max);
        CHECK(std::abs(b.alloc.pilot_cu[c * K + K - 1 - k] - a.alloc.pilot_cu[c * K + k]) <= 1e-4 * net.p_max);
      }
    for (int l = 0; l < L; ++l) CHECK(std::abs(b.alloc.data_d2d[L - 1 - l] - a.alloc.data_d2d[l]) <= 1e-4 * net.p_max);
  }
  const auto m1 = maxmin_data(net, PowerAllocation::full(net), Processing::MR);
  const auto m2 = maxmin_data(per, PowerAllocation::full(per), Processing::MR);
  CHECK(std::abs(m1.objective - m2.objective) <= 1e-3);
}

TEST_CASE("degenerate users are left out of max-min") {
  Network net = testutil::drop_network(kDesk, 3);
  net.gains.cu_bs(1, 1, 0) = 1e-30;
  const auto excluded = degenerate_users(net, 1e-15);
  REQUIRE(excluded == std::vector<int>{2});
  const auto r = maxmin_data(net, PowerAllocation::full(net), Processing::MR);
  CHECK(r.diag.excluded_users == excluded);
  CHECK(r.objective > 0.1);
  const auto j = maxmin_joint_mr(net);
  CHECK(j.objective > 0.1);
}

TEST_CASE("upper bound rejects users without a desired link") {
  const Network net = testutil::drop_network(kDesk, 3);
  PowerAllocation pilots = PowerAllocation::full(net);
  pilots.pilot_d2d[1] = 0.0;
  CHECK_THROWS_AS(maxmin_upper_bound(net, pilots, Processing::MR), std::domain_error);
  CHECK_NOTHROW(maxmin_upper_bound(net, pilots, Processing::MR, {net.dims.num_cus() + 1}));
}

TEST_CASE("diagnostics serialize") {
  const Network net = testutil::drop_network(kDesk, 2);
  ControlProblemSpec spec;
  const auto r = solve(net, spec);
  const nlohmann::json j = r;
  CHECK(j.contains("alloc"));
  CHECK(j["diagnostics"]["iterations"].get<int>() == r.diag.iterations);
  CHECK(nlohmann::json(spec)["objective"] == "maxmin");
}
