#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "d2dmimo/experiment.hpp"
#include "test_util.hpp"

using namespace d2dmimo;

namespace {

ExperimentPlan equal_power_plan(SystemDimensions d, int drops) {
  ExperimentPlan plan;
  plan.config = testutil::config(d);
  plan.num_drops = drops;
  plan.baseline_equal_power = true;
  plan.exact_samples = 200;
  plan.master_seed = 42;
  return plan;
}

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_rows_header(os);
  for (const auto& r : rows) write_row(os, r);
  return os.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("equal-power drop of the reference layout yields one row per user") {
  const auto table = run_experiment(equal_power_plan({}, 1));
  const auto rows = table.rows();
  REQUIRE(rows.size() == 55);
  CHECK(std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return r.user_type == "cu"; }) == 45);
  for (const auto& r : rows) {
    CHECK(r.problem == "equal_power_mr");
    CHECK(r.p_data == 200.0);
    CHECK(std::isfinite(r.se));
    CHECK((r.user_type == "d2d") == (r.cell == -1));
  }
}

TEST_CASE("reruns, drop subsets and thread counts give identical rows") {
  ExperimentPlan plan = equal_power_plan({4, 32, 2, 4, 2, 200}, 4);
  ControlProblemSpec spec;
  plan.problems.push_back(spec);
  plan.threads = 1;
  const auto a = run_experiment(plan);
  const auto b = run_experiment(plan);
  CHECK(csv(a.rows()) == csv(b.rows()));

  plan.threads = 3;
  std::vector<int> seen;
  const auto c = run_experiment(plan, [&](const DropResult& d) { seen.push_back(d.drop); });
  CHECK(csv(a.rows()) == csv(c.rows()));
  CHECK(seen == std::vector<int>{0, 1, 2, 3});

  CHECK(csv(run_drop(plan, 2).rows) == csv(a.drops[2].rows));
  ExperimentPlan longer = plan;
  longer.num_drops = 6;
  const auto d = run_experiment(longer);
  for (int i = 0; i < 4; ++i) CHECK(csv(d.drops[i].rows) == csv(a.drops[i].rows));
  CHECK(plan.drop_seed(1) != plan.drop_seed(2));
}

TEST_CASE("empty table still writes every output") {
  ResultTable table;
  table.plan = equal_power_plan({4, 32, 2, 4, 2, 200}, 1);
  const auto dir = std::filesystem::temp_directory_path() / "d2dmimo_empty_outputs";
  std::filesystem::remove_all(dir);
  emit_outputs(table, dir);
  std::ostringstream header;
  write_rows_header(header);
  CHECK(slurp(dir / "rows.csv") == header.str());
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["failure_count"] == 0);
  CHECK(summary["problems"].empty());
  std::filesystem::remove_all(dir);
  CHECK(compute_cdf({}, "x").se.empty());
}

TEST_CASE("CDF of a single value is a step at that value") {
  ResultRow r;
  r.problem = "p";
  r.user_type = "cu";
  r.se = 2.0;
  const auto t = compute_cdf({r}, "p", 5);
  REQUIRE(t.se.size() == 5);
  CHECK(t.se == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  CHECK(t.cdf == std::vector<double>{0.0, 0.0, 0.0, 0.0, 1.0});
  CHECK(t.cdf_cu == t.cdf);
  CHECK(std::isnan(t.cdf_d2d[0]));
}

TEST_CASE("CDFs are non-decreasing and end at one") {
  const auto table = run_experiment(equal_power_plan({4, 32, 2, 4, 2, 200}, 3));
  const auto t = compute_cdf(table.rows(), "equal_power_mr");
  REQUIRE(t.se.size() == kCdfPoints);
  for (std::size_t i = 1; i < t.se.size(); ++i) {
    CHECK(t.se[i] > t.se[i - 1]);
    CHECK(t.cdf[i] >= t.cdf[i - 1]);
    CHECK(t.cdf_cu[i] >= t.cdf_cu[i - 1]);
    CHECK(t.cdf_d2d[i] >= t.cdf_d2d[i - 1]);
  }
  CHECK(t.cdf.back() == 1.0);
  CHECK(t.cdf_cu.back() <= 1.0);
}

TEST_CASE("optimized max-min never falls below equal power") {
  ExperimentPlan plan = equal_power_plan({4, 32, 2, 4, 2, 200}, 3);
  plan.baseline_cellular_only = true;
  ControlProblemSpec mm, mp;
  mp.objective = Objective::MaxProd;
  plan.problems = {mm, mp};
  const auto table = run_experiment(plan);
  CHECK(table.failures() == 0);
  const auto s = summarize(table);
  CHECK(s["checks"]["maxmin_below_equal_power"].empty());
  CHECK(s["problems"].contains("cellular_only_mr"));
  CHECK(s["problems"]["cellular_only_mr"]["rows"] == 3 * 8);
  CHECK(s["problems"]["mr_maxmin_data"]["rows"] == 3 * 12);
  for (const auto& d : table.drops)
    for (const auto& o : d.outcomes)
      if (o.kind == "control" && o.objective == Objective::MaxMin) CHECK(o.objective_value >= o.equal_power_min_se);
}

TEST_CASE("plan validation") {
  ExperimentPlan plan = equal_power_plan({4, 6, 2, 4, 4, 200}, 1);
  CHECK_NOTHROW(plan.validate());
  ControlProblemSpec zf;
  zf.processing = Processing::ZF;
  plan.problems.push_back(zf);
  CHECK_THROWS_AS(plan.validate(), ConfigError);
  plan.problems.clear();
  plan.num_drops = 0;
  CHECK_THROWS_AS(plan.validate(), ConfigError);
}
