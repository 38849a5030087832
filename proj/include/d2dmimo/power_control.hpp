#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "d2dmimo/estimation.hpp"
#include "d2dmimo/gp/geometric_program.hpp"
#include "d2dmimo/gp/linear_feasibility.hpp"
#include "d2dmimo/scenario.hpp"
#include "d2dmimo/spectral_efficiency.hpp"

namespace d2dmimo {

enum class Objective { MaxMin, MaxProd };
enum class Variables { DataOnly, JointPilotData };

std::string to_string(Objective o);
std::string to_string(Variables v);
/// "maxmin" / "maxprod"; throws std::invalid_argument.
Objective objective_from_string(const std::string& s);
/// "data" / "joint"; throws std::invalid_argument.
Variables variables_from_string(const std::string& s);

struct ControlSettings {
  double bisection_eps = 1e-3;  // b/s/Hz
  int bisection_max_iter = 64;
  /// Pilot-power change threshold of the successive loop, as a fraction of p_max.
  double successive_eps_frac = 1e-3;
  int successive_max_iter = 100;
  /// Lower GP bound on every power, as a fraction of p_max.
  double power_floor_frac = 1e-12;
  /// Post-pass: powers below this fraction of p_max are set to 0 when that
  /// does not lower the objective.
  double snap_frac = 1e-9;
  /// Users whose desired-link gain is below this fraction of the largest one
  /// are left out of max-min objectives.
  double degenerate_ratio = 1e-15;
  gp::GpSettings gp;
  gp::LpSettings lp;
};

struct ControlProblemSpec {
  Objective objective = Objective::MaxMin;
  Variables variables = Variables::DataOnly;
  Processing processing = Processing::MR;
  ControlSettings settings;

  /// Short identifier such as "mr_maxmin_data".
  std::string id() const;
};

enum class SolveStatus { Optimal, IterationLimit, SolverFailure };
const char* to_string(SolveStatus s);

struct SolveDiagnostics {
  int iterations = 0;
  /// Bisection: lower end after each probe. Successive loop: true objective
  /// after each accepted iterate (index 0 is the starting point).
  std::vector<double> objective_trace;
  /// Bisection only: interval width after each probe.
  std::vector<double> interval_widths;
  SolveStatus status = SolveStatus::Optimal;
  std::string message;
  std::vector<std::string> active_constraints;
  std::vector<int> excluded_users;
  int newton_steps = 0;
  double wall_time_s = 0.0;
};

struct ControlResult {
  PowerAllocation alloc;
  /// Max-min: smallest SE over included users (b/s/Hz); for the bisection
  /// this is the certified lower end. Max-product: sum of ln SINR.
  double objective = 0.0;
  /// GP auxiliaries: per-user SINR targets (max-product, users listed in
  /// `aux_users`) or the single common target (max-min). Empty for bisection.
  std::vector<double> aux;
  std::vector<int> aux_users;
  SolveDiagnostics diag;
};

/// User index u: CU b*K + k for u < B*K, else D2D pair u - B*K.
std::vector<int> degenerate_users(const Network& net, double ratio);

/// Interference-free SE bound, minimized over the included users, with
/// pilot powers from `pilots`. Throws std::domain_error if an included user
/// has zero desired-link estimate gain.
double maxmin_upper_bound(const Network& net, const PowerAllocation& pilots, Processing proc,
                          const std::vector<int>& excluded = {});

/// Whether every included user can reach SE `lambda` with the pilot powers
/// of `pilots` fixed. On success the witness (data powers) is written to
/// `witness` when non-null.
bool maxmin_data_feasible(const Network& net, const PowerAllocation& pilots, Processing proc, double lambda,
                          const ControlSettings& settings = {}, PowerAllocation* witness = nullptr,
                          const std::vector<int>& excluded = {});

/// Objective value used by every solver: min SE over included users or sum of ln SINR.
double objective_value(const Network& net, const PowerAllocation& alloc, Processing proc, Objective obj,
                       const std::vector<int>& excluded = {});

ControlResult maxmin_data(const Network& net, const PowerAllocation& pilots, Processing proc,
                          const ControlSettings& settings = {});
ControlResult maxprod_data(const Network& net, const PowerAllocation& pilots, Processing proc,
                           const ControlSettings& settings = {});
ControlResult maxmin_joint_mr(const Network& net, const ControlSettings& settings = {});
ControlResult maxprod_joint_mr(const Network& net, const ControlSettings& settings = {});
/// Successive monomial-bound loop for joint ZF control, started at full power.
ControlResult zf_joint_successive(const Network& net, Objective obj, const ControlSettings& settings = {});

/// Routes a spec to the matching solver; data-only problems use full pilot power.
ControlResult solve(const Network& net, const ControlProblemSpec& spec);

void to_json(nlohmann::json& j, const SolveDiagnostics& d);
void to_json(nlohmann::json& j, const ControlProblemSpec& s);
void to_json(nlohmann::json& j, const ControlResult& r);

}  // namespace d2dmimo
