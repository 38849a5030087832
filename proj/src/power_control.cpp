#include "d2dmimo/power_control.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "d2dmimo/sinr_model.hpp"

namespace d2dmimo {

std::string to_string(Objective o) { return o == Objective::MaxMin ? "maxmin" : "maxprod"; }
std::string to_string(Variables v) { return v == Variables::DataOnly ? "data" : "joint"; }

Objective objective_from_string(const std::string& s) {
  if (s == "maxmin") return Objective::MaxMin;
  if (s == "maxprod") return Objective::MaxProd;
  throw std::invalid_argument("unknown objective '" + s + "' (expected maxmin or maxprod)");
}

Variables variables_from_string(const std::string& s) {
  if (s == "data") return Variables::DataOnly;
  if (s == "joint") return Variables::JointPilotData;
  throw std::invalid_argument("unknown variables '" + s + "' (expected data or joint)");
}

std::string ControlProblemSpec::id() const {
  return to_string(processing) + "_" + to_string(objective) + "_" + to_string(variables);
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

std::string user_name(const Network& net, int u) {
  const int K = net.dims.cus_per_cell, BK = net.dims.num_cus();
  if (u < BK) return "cu[" + std::to_string(u / K) + "," + std::to_string(u % K) + "]";
  return "d2d[" + std::to_string(u - BK) + "]";
}

std::vector<double> user_sinr(const Network& net, const PowerAllocation& alloc, Processing proc) {
  const auto r = evaluate_se(net, alloc, proc);
  std::vector<double> out;
  for (const auto& s : r.cu) out.push_back(s.sinr);
  for (const auto& s : r.d2d) out.push_back(s.sinr);
  return out;
}

/// Users within `slack` of the smallest SE (max-min) or powers at p_max (max-product).
std::vector<std::string> active_set(const Network& net, const PowerAllocation& alloc, Processing proc, Objective obj,
                                    const std::vector<int>& excluded, double slack) {
  std::vector<std::string> out;
  if (obj == Objective::MaxMin) {
    const auto sinr = user_sinr(net, alloc, proc);
    const double floor = objective_value(net, alloc, proc, obj, excluded);
    for (int u = 0; u < static_cast<int>(sinr.size()); ++u) {
      if (contains(excluded, u)) continue;
      if (se_from_sinr(sinr[u], net.dims) <= floor + slack) out.push_back("se:" + user_name(net, u));
    }
    return out;
  }
  const int BK = net.dims.num_cus();
  const double hi = alloc.p_max * (1.0 - 1e-6);
  for (int u = 0; u < BK; ++u) {
    if (alloc.data_cu[u] >= hi) out.push_back("p_data:" + user_name(net, u));
    if (alloc.pilot_cu[u] >= hi) out.push_back("p_pilot:" + user_name(net, u));
  }
  for (int l = 0; l < net.dims.num_d2d_pairs; ++l) {
    if (alloc.data_d2d[l] >= hi) out.push_back("p_data:" + user_name(net, BK + l));
    if (alloc.pilot_d2d[l] >= hi) out.push_back("p_pilot:" + user_name(net, BK + l));
  }
  return out;
}

/// Sets powers below snap_frac * p_max to zero when the objective does not drop.
PowerAllocation snap_small_powers(const Network& net, const PowerAllocation& alloc, Processing proc, Objective obj,
                                  const std::vector<int>& excluded, double snap_frac) {
  const double threshold = snap_frac * alloc.p_max;
  std::vector<double*> small;
  PowerAllocation out = alloc;
  for (auto* v : {&out.data_cu, &out.data_d2d, &out.pilot_cu, &out.pilot_d2d})
    for (double& p : *v)
      if (p > 0.0 && p < threshold) small.push_back(&p);
  if (small.empty()) return out;
  double best = objective_value(net, out, proc, obj, excluded);
  auto keeps = [&](double before) {
    const double after = objective_value(net, out, proc, obj, excluded);
    if (after >= before - 1e-12 * (1.0 + std::abs(before))) {
      best = after;
      return true;
    }
    return false;
  };
  std::vector<double> saved;
  for (double* p : small) saved.push_back(*p);
  for (double* p : small) *p = 0.0;
  if (keeps(best)) return out;
  for (std::size_t i = 0; i < small.size(); ++i) *small[i] = saved[i];
  for (double* p : small) {
    const double v = *p;
    *p = 0.0;
    if (!keeps(best)) *p = v;
  }
  return out;
}

SolveStatus from_gp(gp::GpStatus s) {
  switch (s) {
    case gp::GpStatus::Optimal: return SolveStatus::Optimal;
    case gp::GpStatus::IterationLimit: return SolveStatus::IterationLimit;
    default: return SolveStatus::SolverFailure;
  }
}

struct GpOutcome {
  gp::GpResult result;
  PowerAllocation alloc;
  std::vector<double> aux;
  std::vector<int> users;
  std::vector<int> dropped;  // users whose desired signal is identically zero
};

/// One GP over the selected power families. Each included user gets the
/// constraint aux * denominator / numerator <= 1, with one aux per user
/// (max-product) or a shared one (max-min); the objective is prod aux^{-1}.
GpOutcome solve_sinr_gp(const Network& net, const PowerAllocation& fixed, Processing proc, Objective obj,
                        bool pilot_vars, const PowerAllocation& expansion, const PowerAllocation& start,
                        const std::vector<int>& excluded, const ControlSettings& settings) {
  gp::GeometricProgram prog;
  const auto pb = bind_powers(prog, net, fixed, true, pilot_vars, settings.power_floor_frac);
  const int npow = prog.num_vars();
  const Eigen::VectorXd x_exp = pb.point_of(expansion, npow);
  const int BK = net.dims.num_cus();

  GpOutcome out;
  std::vector<SinrFraction> fractions;
  for (int u = 0; u < net.dims.num_users(); ++u) {
    if (contains(excluded, u)) continue;
    SinrFraction f;
    if (u < BK) {
      const int K = net.dims.cus_per_cell;
      f = proc == Processing::MR ? cu_fraction_mr(net, pb, u / K, u % K)
                                 : cu_fraction_zf(net, pb, u / K, u % K, x_exp);
    } else {
      f = d2d_fraction(net, pb, u - BK);
    }
    if (!f.numerator) {
      out.dropped.push_back(u);
      continue;
    }
    out.users.push_back(u);
    fractions.push_back(std::move(f));
  }
  if (fractions.empty()) throw std::invalid_argument("power control: no user with a non-zero desired signal");

  std::vector<int> aux_var;
  const int n_aux = obj == Objective::MaxMin ? 1 : static_cast<int>(fractions.size());
  for (int a = 0; a < n_aux; ++a) aux_var.push_back(prog.add_variable(obj == Objective::MaxMin ? "t" : "sinr[" + std::to_string(out.users[a]) + "]", 1e-20, 1e20));
  gp::Monomial objective(1.0);
  for (int v : aux_var) objective = objective * gp::Monomial::variable(v, -1.0);
  prog.objective = gp::Posynomial(objective);
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const int v = aux_var[obj == Objective::MaxMin ? 0 : i];
    prog.add_inequality(fractions[i].denominator * (gp::Monomial::variable(v) / *fractions[i].numerator));
  }

  Eigen::VectorXd x0 = pb.point_of(start, prog.num_vars());
  const double lo = 2.0 * settings.power_floor_frac;
  for (int i = 0; i < npow; ++i) x0(i) = std::clamp(x0(i), lo, 1.0 - 1e-6);
  std::vector<double> ratio(fractions.size());
  for (std::size_t i = 0; i < fractions.size(); ++i) ratio[i] = fractions[i].eval(x0);
  if (obj == Objective::MaxMin) {
    x0(aux_var[0]) = 0.5 * *std::min_element(ratio.begin(), ratio.end());
  } else {
    for (std::size_t i = 0; i < fractions.size(); ++i) x0(aux_var[i]) = 0.5 * ratio[i];
  }
  for (int v : aux_var) x0(v) = std::clamp(x0(v), 1e-19, 1e19);

  out.result = gp::gp_solve(prog, settings.gp, x0);
  out.alloc = pb.realize(out.result.x);
  for (int v : aux_var) out.aux.push_back(out.result.x(v));
  return out;
}

ControlResult gp_control(const Network& net, const PowerAllocation& fixed, Processing proc, Objective obj,
                         bool pilot_vars, const ControlSettings& settings) {
  const auto t0 = Clock::now();
  ControlResult res;
  const auto excluded = obj == Objective::MaxMin ? degenerate_users(net, settings.degenerate_ratio) : std::vector<int>{};
  PowerAllocation start = fixed;
  std::fill(start.data_cu.begin(), start.data_cu.end(), 0.5 * net.p_max);
  std::fill(start.data_d2d.begin(), start.data_d2d.end(), 0.5 * net.p_max);
  if (pilot_vars) {
    std::fill(start.pilot_cu.begin(), start.pilot_cu.end(), 0.5 * net.p_max);
    std::fill(start.pilot_d2d.begin(), start.pilot_d2d.end(), 0.5 * net.p_max);
  }
  const auto o = solve_sinr_gp(net, fixed, proc, obj, pilot_vars, fixed, start, excluded, settings);
  res.diag.excluded_users = excluded;
  res.diag.excluded_users.insert(res.diag.excluded_users.end(), o.dropped.begin(), o.dropped.end());
  res.diag.status = from_gp(o.result.status);
  res.diag.iterations = 1;
  res.diag.newton_steps = o.result.newton_steps;
  if (res.diag.status != SolveStatus::Optimal) res.diag.message = std::string("gp: ") + gp::to_string(o.result.status);
  res.alloc = snap_small_powers(net, o.alloc, proc, obj, res.diag.excluded_users, settings.snap_frac);
  res.objective = objective_value(net, res.alloc, proc, obj, res.diag.excluded_users);
  res.aux = o.aux;
  if (obj == Objective::MaxProd) res.aux_users = o.users;
  res.diag.objective_trace.push_back(res.objective);
  res.diag.active_constraints = active_set(net, res.alloc, proc, obj, res.diag.excluded_users, settings.bisection_eps);
  res.diag.wall_time_s = seconds_since(t0);
  return res;
}

}  // namespace

std::vector<int> degenerate_users(const Network& net, double ratio) {
  const auto& d = net.dims;
  std::vector<double> gain;
  for (int b = 0; b < d.num_cells; ++b)
    for (int k = 0; k < d.cus_per_cell; ++k) gain.push_back(net.gains.cu_bs(b, b, k));
  for (int l = 0; l < d.num_d2d_pairs; ++l) gain.push_back(net.gains.d2d_d2d(l, l));
  const double mx = gain.empty() ? 0.0 : *std::max_element(gain.begin(), gain.end());
  std::vector<int> out;
  for (int u = 0; u < static_cast<int>(gain.size()); ++u)
    if (gain[u] < ratio * mx) out.push_back(u);
  return out;
}

double maxmin_upper_bound(const Network& net, const PowerAllocation& pilots, Processing proc,
                          const std::vector<int>& excluded) {
  const auto& d = net.dims;
  if (proc == Processing::ZF && !d.supports_zf()) throw std::invalid_argument("maxmin_upper_bound: ZF requires M > K + N");
  const auto q = compute_estimation_quality(net, pilots);
  const double gain = proc == Processing::MR ? d.antennas_per_bs : d.zf_gain();
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (int u = 0; u < d.num_users(); ++u) {
    if (contains(excluded, u)) continue;
    const int K = d.cus_per_cell;
    const double snr = u < d.num_cus() ? net.p_max * gain * q.cu_bs(u / K, u / K, u % K)
                                       : net.p_max * q.d2d_d2d(u - d.num_cus(), u - d.num_cus());
    if (!(snr > 0.0)) throw std::domain_error("maxmin_upper_bound: zero desired-link gain for " + user_name(net, u));
    best = std::min(best, snr);
    any = true;
  }
  if (!any) throw std::domain_error("maxmin_upper_bound: no user left");
  return se_from_sinr(best, d);
}

bool maxmin_data_feasible(const Network& net, const PowerAllocation& pilots, Processing proc, double lambda,
                          const ControlSettings& settings, PowerAllocation* witness, const std::vector<int>& excluded) {
  const auto& d = net.dims;
  const auto model = linear_sinr_model(net, pilots, proc);
  const double t = std::exp2(std::max(lambda, 0.0) / d.prelog()) - 1.0;
  const int n = d.num_users();
  std::vector<int> rows;
  for (int u = 0; u < n; ++u)
    if (!contains(excluded, u)) rows.push_back(u);
  gp::LinearFeasibilityProblem lp;
  lp.A.resize(static_cast<Eigen::Index>(rows.size()), n);
  lp.c.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    lp.A.row(i) = (t * model.den.row(rows[r]) - model.num.row(rows[r])) * net.p_max;
    lp.c(i) = -t;
  }
  lp.upper = Eigen::VectorXd::Ones(n);
  const auto res = gp::lp_feasible(lp, settings.lp);
  if (res.feasible && witness) {
    *witness = pilots;
    witness->p_max = net.p_max;
    const int BK = d.num_cus();
    for (int u = 0; u < n; ++u) {
      const double p = std::clamp(res.x(u), 0.0, 1.0) * net.p_max;
      if (u < BK) {
        witness->data_cu[u] = p;
      } else {
        witness->data_d2d[u - BK] = p;
      }
    }
  }
  return res.feasible;
}

double objective_value(const Network& net, const PowerAllocation& alloc, Processing proc, Objective obj,
                       const std::vector<int>& excluded) {
  const auto sinr = user_sinr(net, alloc, proc);
  if (obj == Objective::MaxProd) {
    double s = 0.0;
    for (std::size_t u = 0; u < sinr.size(); ++u)
      if (!contains(excluded, static_cast<int>(u))) s += std::log(sinr[u]);
    return s;
  }
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < sinr.size(); ++u)
    if (!contains(excluded, static_cast<int>(u))) m = std::min(m, sinr[u]);
  return se_from_sinr(m, net.dims);
}

ControlResult maxmin_data(const Network& net, const PowerAllocation& pilots, Processing proc,
                          const ControlSettings& settings) {
  const auto t0 = Clock::now();
  ControlResult res;
  const auto excluded = degenerate_users(net, settings.degenerate_ratio);
  res.diag.excluded_users = excluded;
  double lo = 0.0, hi = maxmin_upper_bound(net, pilots, proc, excluded);
  PowerAllocation witness = pilots;
  witness.p_max = net.p_max;
  std::fill(witness.data_cu.begin(), witness.data_cu.end(), net.p_max);
  std::fill(witness.data_d2d.begin(), witness.data_d2d.end(), net.p_max);
  while (hi - lo > settings.bisection_eps && res.diag.iterations < settings.bisection_max_iter) {
    const double mid = 0.5 * (lo + hi);
    PowerAllocation w;
    if (maxmin_data_feasible(net, pilots, proc, mid, settings, &w, excluded)) {
      lo = mid;
      witness = std::move(w);
    } else {
      hi = mid;
    }
    ++res.diag.iterations;
    res.diag.objective_trace.push_back(lo);
    res.diag.interval_widths.push_back(hi - lo);
  }
  if (hi - lo > settings.bisection_eps) {
    res.diag.status = SolveStatus::IterationLimit;
    res.diag.message = "bisection interval above tolerance at the iteration cap";
  }
  res.alloc = snap_small_powers(net, witness, proc, Objective::MaxMin, excluded, settings.snap_frac);
  res.objective = lo;
  res.diag.active_constraints = active_set(net, res.alloc, proc, Objective::MaxMin, excluded, settings.bisection_eps);
  res.diag.wall_time_s = seconds_since(t0);
  return res;
}

ControlResult maxprod_data(const Network& net, const PowerAllocation& pilots, Processing proc,
                           const ControlSettings& settings) {
  if (proc == Processing::ZF && !net.dims.supports_zf()) throw std::invalid_argument("maxprod_data: ZF requires M > K + N");
  return gp_control(net, pilots, proc, Objective::MaxProd, false, settings);
}

ControlResult maxmin_joint_mr(const Network& net, const ControlSettings& settings) {
  return gp_control(net, PowerAllocation::full(net), Processing::MR, Objective::MaxMin, true, settings);
}

ControlResult maxprod_joint_mr(const Network& net, const ControlSettings& settings) {
  return gp_control(net, PowerAllocation::full(net), Processing::MR, Objective::MaxProd, true, settings);
}

ControlResult zf_joint_successive(const Network& net, Objective obj, const ControlSettings& settings) {
  if (!net.dims.supports_zf()) throw std::invalid_argument("zf_joint_successive: requires M > K + N");
  const auto t0 = Clock::now();
  ControlResult res;
  const auto excluded = obj == Objective::MaxMin ? degenerate_users(net, settings.degenerate_ratio) : std::vector<int>{};
  res.diag.excluded_users = excluded;
  PowerAllocation cur = PowerAllocation::full(net);
  double f_cur = objective_value(net, cur, Processing::ZF, obj, excluded);
  res.diag.objective_trace.push_back(f_cur);
  const double eps = settings.successive_eps_frac * net.p_max;
  bool converged = false;
  while (res.diag.iterations < settings.successive_max_iter) {
    ++res.diag.iterations;
    GpOutcome o;
    try {
      o = solve_sinr_gp(net, cur, Processing::ZF, obj, true, cur, cur, excluded, settings);
    } catch (const std::exception& e) {
      res.diag.status = SolveStatus::SolverFailure;
      res.diag.message = std::string("iteration ") + std::to_string(res.diag.iterations) + ": " + e.what();
      break;
    }
    res.diag.newton_steps += o.result.newton_steps;
    if (o.result.status != gp::GpStatus::Optimal && o.result.status != gp::GpStatus::IterationLimit) {
      res.diag.status = SolveStatus::SolverFailure;
      res.diag.message = std::string("iteration ") + std::to_string(res.diag.iterations) + ": gp " +
                         gp::to_string(o.result.status);
      break;
    }
    const double f_new = objective_value(net, o.alloc, Processing::ZF, obj, excluded);
    if (!(f_new >= f_cur - 1e-9 * (1.0 + std::abs(f_cur)))) {
      // Solver noise around a stationary point; keep the previous iterate.
      res.diag.message = "iterate rejected: true objective would decrease";
      converged = true;
      break;
    }
    double delta = 0.0;
    for (std::size_t i = 0; i < cur.pilot_cu.size(); ++i) delta = std::max(delta, std::abs(o.alloc.pilot_cu[i] - cur.pilot_cu[i]));
    for (std::size_t i = 0; i < cur.pilot_d2d.size(); ++i) delta = std::max(delta, std::abs(o.alloc.pilot_d2d[i] - cur.pilot_d2d[i]));
    cur = o.alloc;
    f_cur = std::max(f_cur, f_new);
    res.diag.objective_trace.push_back(f_new);
    res.aux = o.aux;
    res.aux_users = obj == Objective::MaxProd ? o.users : std::vector<int>{};
    if (delta < eps) {
      converged = true;
      break;
    }
  }
  if (!converged && res.diag.status == SolveStatus::Optimal) {
    res.diag.status = SolveStatus::IterationLimit;
    res.diag.message = "pilot powers still moving at the iteration cap";
  }
  res.alloc = snap_small_powers(net, cur, Processing::ZF, obj, excluded, settings.snap_frac);
  res.objective = objective_value(net, res.alloc, Processing::ZF, obj, excluded);
  res.diag.active_constraints = active_set(net, res.alloc, Processing::ZF, obj, excluded, settings.bisection_eps);
  res.diag.wall_time_s = seconds_since(t0);
  return res;
}

ControlResult solve(const Network& net, const ControlProblemSpec& spec) {
  if (spec.variables == Variables::DataOnly) {
    const auto pilots = PowerAllocation::full(net);
    return spec.objective == Objective::MaxMin ? maxmin_data(net, pilots, spec.processing, spec.settings)
                                               : maxprod_data(net, pilots, spec.processing, spec.settings);
  }
  if (spec.processing == Processing::MR) {
    return spec.objective == Objective::MaxMin ? maxmin_joint_mr(net, spec.settings)
                                               : maxprod_joint_mr(net, spec.settings);
  }
  return zf_joint_successive(net, spec.objective, spec.settings);
}

void to_json(nlohmann::json& j, const SolveDiagnostics& d) {
  j = nlohmann::json{{"iterations", d.iterations},
                     {"objective_trace", d.objective_trace},
                     {"interval_widths", d.interval_widths},
                     {"status", to_string(d.status)},
                     {"message", d.message},
                     {"active_constraints", d.active_constraints},
                     {"excluded_users", d.excluded_users},
                     {"newton_steps", d.newton_steps},
                     {"wall_time_s", d.wall_time_s}};
}

void to_json(nlohmann::json& j, const ControlProblemSpec& s) {
  j = nlohmann::json{{"id", s.id()},
                     {"objective", to_string(s.objective)},
                     {"variables", to_string(s.variables)},
                     {"processing", to_string(s.processing)},
                     {"bisection_eps", s.settings.bisection_eps},
                     {"successive_eps_frac", s.settings.successive_eps_frac},
                     {"bisection_max_iter", s.settings.bisection_max_iter},
                     {"successive_max_iter", s.settings.successive_max_iter}};
}

void to_json(nlohmann::json& j, const ControlResult& r) {
  j = nlohmann::json{{"alloc", r.alloc}, {"objective", r.objective}, {"aux", r.aux},
                     {"aux_users", r.aux_users}, {"diagnostics", r.diag}};
}

}  // namespace d2dmimo
