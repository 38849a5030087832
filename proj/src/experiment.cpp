#include "d2dmimo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "d2dmimo/rng.hpp"

namespace d2dmimo {

void ExperimentPlan::validate() const {
  config.validate();
  if (num_drops < 1) throw ConfigError("drops", "must be at least 1");
  if (exact_samples < 1) throw ConfigError("exact_samples", "must be at least 1");
  if (threads < 0) throw ConfigError("threads", "must be non-negative");
  for (const auto& p : problems) {
    if (p.processing == Processing::ZF && !config.dims.supports_zf()) {
      throw ConfigError("antennas_per_bs", "ZF processing needs more antennas than pilots (M > K + N)");
    }
  }
}

std::uint64_t ExperimentPlan::drop_seed(int drop) const {
  return derive_seed(master_seed, static_cast<std::uint64_t>(drop));
}

std::vector<ResultRow> ResultTable::rows() const {
  std::vector<ResultRow> out;
  for (const auto& d : drops) out.insert(out.end(), d.rows.begin(), d.rows.end());
  return out;
}

int ResultTable::failures() const {
  int n = 0;
  for (const auto& d : drops)
    for (const auto& o : d.outcomes) n += o.failed ? 1 : 0;
  return n;
}

std::vector<std::string> ResultTable::problem_ids() const {
  std::vector<std::string> ids;
  for (const auto& d : drops)
    for (const auto& o : d.outcomes)
      if (std::find(ids.begin(), ids.end(), o.problem) == ids.end()) ids.push_back(o.problem);
  return ids;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void append_rows(DropResult& out, const std::string& id, const Network& net, const PowerAllocation* alloc,
                 const SEReport* report) {
  const auto& d = net.dims;
  const int K = d.cus_per_cell;
  for (int u = 0; u < d.num_cus(); ++u) {
    ResultRow r{out.drop, id, "cu", u / K, u % K, kNaN, kNaN, kNaN, kNaN};
    if (alloc && report) {
      r.se = report->cu[u].se;
      r.sinr = report->cu[u].sinr;
      r.p_data = alloc->data_cu[u];
      r.p_pilot = alloc->pilot_cu[u];
    }
    out.rows.push_back(r);
  }
  for (int l = 0; l < d.num_d2d_pairs; ++l) {
    ResultRow r{out.drop, id, "d2d", -1, l, kNaN, kNaN, kNaN, kNaN};
    if (alloc && report) {
      r.se = report->d2d_se_exact.empty() ? report->d2d[l].se : report->d2d_se_exact[l];
      r.sinr = report->d2d[l].sinr;
      r.p_data = alloc->data_d2d[l];
      r.p_pilot = alloc->pilot_d2d[l];
    }
    out.rows.push_back(r);
  }
}

double min_over(const SEReport& r, const std::vector<int>& excluded) {
  double m = std::numeric_limits<double>::infinity();
  const int BK = static_cast<int>(r.cu.size());
  for (int u = 0; u < BK; ++u)
    if (std::find(excluded.begin(), excluded.end(), u) == excluded.end()) m = std::min(m, r.cu[u].se);
  for (int l = 0; l < static_cast<int>(r.d2d.size()); ++l)
    if (std::find(excluded.begin(), excluded.end(), BK + l) == excluded.end()) m = std::min(m, r.d2d[l].se);
  return m;
}

void record(DropResult& out, ProblemOutcome o, const Network& net, const PowerAllocation* alloc, Processing proc,
            const ExperimentPlan& plan) {
  std::optional<SEReport> report;
  if (alloc) {
    report = evaluate_se(net, *alloc, proc, plan.exact_samples, derive_seed(out.seed, stable_hash(o.problem)));
    o.sum_se = report->sum_se();
    o.min_se = report->min_se();
  } else {
    o.sum_se = o.min_se = kNaN;
  }
  append_rows(out, o.problem, net, alloc, report ? &*report : nullptr);
  out.outcomes.push_back(std::move(o));
}

std::vector<Processing> processings_in_use(const ExperimentPlan& plan) {
  std::vector<Processing> out;
  for (const auto& p : plan.problems)
    if (std::find(out.begin(), out.end(), p.processing) == out.end()) out.push_back(p.processing);
  if (out.empty()) out.push_back(Processing::MR);
  return out;
}

}  // namespace

DropResult run_drop(const ExperimentPlan& plan, int drop) {
  DropResult out;
  out.drop = drop;
  out.seed = plan.drop_seed(drop);
  const Drop scenario = build_scenario(plan.config, out.seed);
  const Network& net = scenario.network;
  const auto full = PowerAllocation::full(net);

  for (const auto& spec : plan.problems) {
    ProblemOutcome o;
    o.problem = spec.id();
    o.processing = spec.processing;
    o.kind = "control";
    o.objective = spec.objective;
    try {
      const auto res = solve(net, spec);
      o.failed = res.diag.status == SolveStatus::SolverFailure;
      o.message = res.diag.message;
      o.objective_value = res.objective;
      o.iterations = res.diag.iterations;
      o.wall_time_s = res.diag.wall_time_s;
      if (spec.objective == Objective::MaxMin) {
        o.equal_power_min_se = min_over(evaluate_se(net, full, spec.processing), res.diag.excluded_users);
      }
      record(out, std::move(o), net, &res.alloc, spec.processing, plan);
    } catch (const std::exception& e) {
      o.failed = true;
      o.message = e.what();
      o.objective_value = kNaN;
      record(out, std::move(o), net, nullptr, spec.processing, plan);
    }
  }
  const auto procs = processings_in_use(plan);
  auto baseline = [&](const std::string& kind, const Network& n, Processing proc) {
    ProblemOutcome o;
    o.problem = kind + "_" + to_string(proc);
    o.processing = proc;
    o.kind = kind;
    const auto alloc = PowerAllocation::full(n);
    if (proc == Processing::ZF && !n.dims.supports_zf()) {
      o.failed = true;
      o.message = "ZF needs M > K + N";
      record(out, std::move(o), n, nullptr, proc, plan);
      return;
    }
    record(out, std::move(o), n, &alloc, proc, plan);
  };
  if (plan.baseline_equal_power)
    for (auto proc : procs) baseline("equal_power", net, proc);
  if (plan.baseline_cellular_only) {
    const Network cellular = net.without_d2d();
    for (auto proc : procs) baseline("cellular_only", cellular, proc);
  }
  return out;
}

ResultTable run_experiment(const ExperimentPlan& plan, const std::function<void(const DropResult&)>& on_drop) {
  plan.validate();
  ResultTable table;
  table.plan = plan;
  const int n = plan.num_drops;
  int workers = plan.threads > 0 ? plan.threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);

  std::vector<std::optional<DropResult>> done(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<int> next{0};
  auto work = [&] {
    for (;;) {
      const int d = next.fetch_add(1);
      if (d >= n) return;
      std::optional<DropResult> r;
      std::exception_ptr err;
      try {
        r = run_drop(plan, d);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        done[d] = std::move(r);
        errors[d] = err;
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);

  std::exception_ptr first_error;
  for (int d = 0; d < n; ++d) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return done[d].has_value() || errors[d]; });
    if (errors[d]) {
      if (!first_error) first_error = errors[d];
      continue;
    }
    DropResult r = std::move(*done[d]);
    done[d].reset();
    lock.unlock();
    if (on_drop && !first_error) on_drop(r);
    table.drops.push_back(std::move(r));
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return table;
}

CdfTable compute_cdf(const std::vector<ResultRow>& rows, const std::string& problem, int points) {
  CdfTable t;
  std::vector<double> all, cu, d2d;
  for (const auto& r : rows) {
    if (r.problem != problem || !std::isfinite(r.se)) continue;
    all.push_back(r.se);
    (r.user_type == "cu" ? cu : d2d).push_back(r.se);
  }
  if (all.empty()) return t;
  const double hi = *std::max_element(all.begin(), all.end());
  const double step = hi / (points - 1);
  auto frac = [](const std::vector<double>& v, double x) {
    if (v.empty()) return kNaN;
    const auto c = std::count_if(v.begin(), v.end(), [x](double s) { return s <= x; });
    return static_cast<double>(c) / static_cast<double>(v.size());
  };
  for (int i = 0; i < points; ++i) {
    const double x = i == points - 1 ? hi : i * step;
    t.se.push_back(x);
    t.cdf.push_back(frac(all, x));
    t.cdf_cu.push_back(frac(cu, x));
    t.cdf_d2d.push_back(frac(d2d, x));
  }
  return t;
}

void write_rows_header(std::ostream& os) { os << "drop,problem,user_type,cell,index,se,sinr,p_data,p_pilot\n"; }

void write_row(std::ostream& os, const ResultRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%s,%s,%d,%d,%.17g,%.17g,%.17g,%.17g\n", r.drop, r.problem.c_str(),
                r.user_type.c_str(), r.cell, r.index, r.se, r.sinr, r.p_data, r.p_pilot);
  os << buf;
}

void write_cdf_csv(std::ostream& os, const CdfTable& cdf) {
  os << "se,cdf,cdf_cu,cdf_d2d\n";
  char buf[256];
  for (std::size_t i = 0; i < cdf.se.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", cdf.se[i], cdf.cdf[i], cdf.cdf_cu[i], cdf.cdf_d2d[i]);
    os << buf;
  }
}

namespace {

/// Linear interpolation between order statistics.
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

nlohmann::json finite_or_null(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json summarize(const ResultTable& table) {
  nlohmann::json j;
  j["drops"] = table.drops.size();
  j["master_seed"] = table.plan.master_seed;
  j["config"] = table.plan.config;
  nlohmann::json problems = nlohmann::json::object();
  nlohmann::json failures = nlohmann::json::array();
  const auto rows = table.rows();
  for (const auto& id : table.problem_ids()) {
    std::vector<double> sums, objectives, cu_se, d2d_se;
    int fails = 0, row_count = 0;
    double wall = 0.0;
    for (const auto& d : table.drops) {
      for (const auto& o : d.outcomes) {
        if (o.problem != id) continue;
        if (o.failed) {
          ++fails;
          failures.push_back({{"drop", d.drop}, {"problem", id}, {"message", o.message}});
        }
        if (std::isfinite(o.sum_se)) sums.push_back(o.sum_se);
        if (o.kind == "control" && std::isfinite(o.objective_value)) objectives.push_back(o.objective_value);
        wall += o.wall_time_s;
      }
    }
    for (const auto& r : rows) {
      if (r.problem != id) continue;
      ++row_count;
      if (!std::isfinite(r.se)) continue;
      (r.user_type == "cu" ? cu_se : d2d_se).push_back(r.se);
    }
    auto mean = [](const std::vector<double>& v) {
      if (v.empty()) return kNaN;
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    nlohmann::json p{{"rows", row_count},
                     {"failures", fails},
                     {"sum_se_mean", finite_or_null(mean(sums))},
                     {"cu_se_mean", finite_or_null(mean(cu_se))},
                     {"d2d_se_mean", finite_or_null(mean(d2d_se))},
                     {"objective_mean", finite_or_null(mean(objectives))},
                     {"wall_time_s", wall}};
    nlohmann::json q = nlohmann::json::object();
    if (!sums.empty()) {
      for (double level : {0.05, 0.25, 0.5, 0.75, 0.95}) {
        char key[16];
        std::snprintf(key, sizeof key, "q%02d", static_cast<int>(std::lround(level * 100)));
        q[key] = quantile(sums, level);
      }
    }
    p["sum_se_quantiles"] = q;
    problems[id] = p;
  }
  j["problems"] = problems;
  j["failures"] = failures;
  j["failure_count"] = failures.size();

  // Expectations that hold per drop in theory or only statistically; reported, never enforced.
  nlohmann::json dominance = nlohmann::json::array(), product_vs_minmax = nlohmann::json::array();
  for (const auto& d : table.drops) {
    for (const auto& o : d.outcomes) {
      if (o.kind != "control" || o.failed) continue;
      if (o.objective == Objective::MaxMin && o.objective_value < o.equal_power_min_se - 1e-9) {
        dominance.push_back({{"drop", d.drop}, {"problem", o.problem}, {"lambda", o.objective_value},
                             {"equal_power_min_se", o.equal_power_min_se}});
      }
      if (o.objective != Objective::MaxProd) continue;
      for (const auto& m : d.outcomes) {
        if (m.kind != "control" || m.failed || m.objective != Objective::MaxMin || m.processing != o.processing) continue;
        if (o.sum_se < m.sum_se) {
          product_vs_minmax.push_back({{"drop", d.drop}, {"maxprod", o.problem}, {"maxmin", m.problem},
                                       {"maxprod_sum_se", o.sum_se}, {"maxmin_sum_se", m.sum_se}});
        }
      }
    }
  }
  j["checks"] = {{"maxmin_below_equal_power", dominance}, {"maxprod_sum_se_below_maxmin", product_vs_minmax}};
  return j;
}

void emit_outputs(const ResultTable& table, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    return f;
  };
  const auto rows = table.rows();
  {
    auto f = open(dir / "rows.csv");
    write_rows_header(f);
    for (const auto& r : rows) write_row(f, r);
    if (!f) throw std::runtime_error("write failed: rows.csv");
  }
  for (const auto& id : table.problem_ids()) {
    auto f = open(dir / ("cdf_" + id + ".csv"));
    write_cdf_csv(f, compute_cdf(rows, id));
    if (!f) throw std::runtime_error("write failed: cdf_" + id + ".csv");
  }
  auto f = open(dir / "summary.json");
  f << summarize(table).dump(2) << '\n';
  if (!f) throw std::runtime_error("write failed: summary.json");
}

}  // namespace d2dmimo
