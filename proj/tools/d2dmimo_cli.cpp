#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "d2dmimo/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct RunArgs {
  std::string config;
  int drops = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string processing = "mr";
  std::string objective = "maxmin";
  std::string vars = "data";
  bool baselines = false;
  int threads = 0;
  int exact_samples = 10000;
};

int run(const RunArgs& a) {
  using namespace d2dmimo;
  ExperimentPlan plan;
  try {
    plan.config = load_config(a.config);
    plan.config_path = a.config;
    plan.num_drops = a.drops;
    plan.master_seed = a.seed;
    plan.out_dir = a.out;
    plan.threads = a.threads;
    plan.exact_samples = a.exact_samples;
    plan.baseline_equal_power = a.baselines;
    plan.baseline_cellular_only = a.baselines;
    ControlProblemSpec spec;
    spec.processing = processing_from_string(a.processing);
    spec.objective = objective_from_string(a.objective);
    spec.variables = variables_from_string(a.vars);
    plan.problems.push_back(spec);
    plan.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  std::filesystem::create_directories(plan.out_dir);
  std::ofstream partial(plan.out_dir / "rows.csv", std::ios::binary | std::ios::trunc);
  if (!partial) {
    std::cerr << "cannot write " << (plan.out_dir / "rows.csv") << '\n';
    return 1;
  }
  write_rows_header(partial);
  partial.flush();
  const auto table = run_experiment(plan, [&](const DropResult& d) {
    for (const auto& r : d.rows) write_row(partial, r);
    partial.flush();
    std::cerr << "drop " << d.drop + 1 << "/" << plan.num_drops << " done\n";
  });
  partial.close();
  emit_outputs(table, plan.out_dir);

  const int failures = table.failures();
  std::cout << "wrote " << table.rows().size() << " rows for " << table.drops.size() << " drops to "
            << plan.out_dir.string() << '\n';
  if (failures > 0) {
    std::cerr << failures << " solve(s) failed; see summary.json\n";
    return kExitSolver;
  }
  return 0;
}

int validate(const std::string& path) {
  try {
    const auto cfg = d2dmimo::load_config(path);
    cfg.validate();
    const auto& d = cfg.dims;
    std::cout << "ok: B=" << d.num_cells << " M=" << d.antennas_per_bs << " K=" << d.cus_per_cell
              << " L=" << d.num_d2d_pairs << " N=" << d.num_d2d_pilots << " tau_c=" << d.coherence_len
              << (d.supports_zf() ? "" : " (ZF unavailable: M <= K + N)") << '\n';
    return 0;
  } catch (const d2dmimo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Power control and spectral-efficiency experiments for massive MIMO with underlaid D2D"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Run Monte-Carlo drops and write rows.csv, cdf_*.csv, summary.json");
  run_cmd->add_option("--config", ra.config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--drops", ra.drops, "Number of drops")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", ra.seed, "Master seed")->required();
  run_cmd->add_option("--out", ra.out, "Output directory")->required();
  run_cmd->add_option("--processing", ra.processing, "mr or zf")->check(CLI::IsMember({"mr", "zf"}));
  run_cmd->add_option("--objective", ra.objective, "maxmin or maxprod")->check(CLI::IsMember({"maxmin", "maxprod"}));
  run_cmd->add_option("--vars", ra.vars, "data or joint")->check(CLI::IsMember({"data", "joint"}));
  run_cmd->add_flag("--baselines", ra.baselines, "Add equal-power and cellular-only baselines");
  run_cmd->add_option("--threads", ra.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--exact-samples", ra.exact_samples, "Monte-Carlo samples for the D2D SE")
      ->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* val_cmd = app.add_subcommand("validate", "Parse a scenario config and check its invariants");
  val_cmd->add_option("--config", validate_path, "Scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  try {
    if (*run_cmd) return run(ra);
    return validate(validate_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
