#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "d2dmimo/power_control.hpp"
#include "d2dmimo/scenario.hpp"

namespace d2dmimo {

struct ExperimentPlan {
  ScenarioConfig config;
  std::filesystem::path config_path;  // informational
  int num_drops = 1;
  std::vector<ControlProblemSpec> problems;
  /// Equal full power for every user, one entry per processing in use (MR if none).
  bool baseline_equal_power = false;
  /// Same drops with the D2D pairs removed, equal full power.
  bool baseline_cellular_only = false;
  std::filesystem::path out_dir;  // where the CLI writes outputs
  std::uint64_t master_seed = 1;
  /// Monte-Carlo samples for the reported D2D SE.
  int exact_samples = 10000;
  /// Worker threads; 0 picks the hardware concurrency.
  int threads = 0;

  /// Throws ConfigError.
  void validate() const;
  std::uint64_t drop_seed(int drop) const;
};

struct ResultRow {
  int drop = 0;
  std::string problem;
  std::string user_type;  // "cu" or "d2d"
  int cell = -1;          // -1 for D2D pairs
  int index = 0;
  double se = 0.0;
  double sinr = 0.0;
  double p_data = 0.0;
  double p_pilot = 0.0;
};

struct ProblemOutcome {
  std::string problem;
  Processing processing = Processing::MR;
  std::string kind;  // "control", "equal_power" or "cellular_only"
  Objective objective = Objective::MaxMin;
  bool failed = false;
  std::string message;
  double objective_value = 0.0;
  double sum_se = 0.0;
  double min_se = 0.0;
  /// Min SE at equal full power on the same drop and processing, over the
  /// users the solver kept (max-min problems only).
  double equal_power_min_se = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
};

struct DropResult {
  int drop = 0;
  std::uint64_t seed = 0;
  std::vector<ResultRow> rows;
  std::vector<ProblemOutcome> outcomes;
};

struct ResultTable {
  ExperimentPlan plan;
  std::vector<DropResult> drops;  // sorted by drop id

  std::vector<ResultRow> rows() const;
  int failures() const;
  /// Problem ids in first-seen order.
  std::vector<std::string> problem_ids() const;
};

/// Runs every drop (in parallel) and returns the table sorted by drop id.
/// `on_drop` is called from the calling thread in drop order as soon as a
/// drop and all earlier ones are done.
ResultTable run_experiment(const ExperimentPlan& plan, const std::function<void(const DropResult&)>& on_drop = {});

/// Computes one drop; deterministic in (plan, drop).
DropResult run_drop(const ExperimentPlan& plan, int drop);

constexpr int kCdfPoints = 200;

struct CdfTable {
  std::vector<double> se;
  std::vector<double> cdf, cdf_cu, cdf_d2d;
};

/// Empirical CDFs of the finite SE values of `problem` on an equispaced grid
/// from 0 to the largest value. Empty when the problem has no rows.
CdfTable compute_cdf(const std::vector<ResultRow>& rows, const std::string& problem, int points = kCdfPoints);

void write_rows_header(std::ostream& os);
void write_row(std::ostream& os, const ResultRow& r);
void write_cdf_csv(std::ostream& os, const CdfTable& cdf);
nlohmann::json summarize(const ResultTable& table);

/// rows.csv, cdf_<problem>.csv and summary.json under `dir`. Throws
/// std::runtime_error on I/O failure.
void emit_outputs(const ResultTable& table, const std::filesystem::path& dir);

}  // namespace d2dmimo
