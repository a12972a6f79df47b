#include "bessched/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bessched/csvio.hpp"

namespace bessched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTinyWeight = 1e-9;        // keeps every variable strictly convex
constexpr double kComplementarityTol = 1e-3;  // kW

enum class Family { SocLower, SocUpper, PowerUpper, PowerLower, Dynamics, Sign };

const char* family_name(Family f) {
  switch (f) {
    case Family::SocLower: return "soc_lower";
    case Family::SocUpper: return "soc_upper";
    case Family::PowerUpper: return "power_upper";
    case Family::PowerLower: return "power_lower";
    case Family::Dynamics: return "soc_dynamics";
    case Family::Sign: return "sign_split";
  }
  return "?";
}

// Assembled problem plus the variable/row bookkeeping needed to unpack a
// solution and to re-solve with fixed charge/discharge signs.
struct Built {
  QuadraticProgram qp;
  int horizon = 0;
  int f0 = 0;                    // offsets
  int hp0 = 0, hm0 = 0;          // split of (w_hi/dt + F), drives the low SOC trajectory
  int lp0 = 0, lm0 = 0;          // split of (w_lo/dt + F), drives the high SOC trajectory
  std::vector<int> hp_bound, hm_bound, lp_bound, lm_bound;  // sign rows, for fixing
  std::vector<int> slack_vars;
  std::vector<Family> slack_family;
  std::vector<int> slack_step;
  std::vector<Family> row_family;  // per row; useful for infeasibility diagnosis
  std::vector<int> row_step;
};

struct HCoefficients {
  double plus;   // multiplies a positive part
  double minus;  // multiplies a negative part
};

Built build_problem(double soc0, const ForecastSet& forecasts, const SchedulerConfig& cfg) {
  const int horizon = cfg.horizon;
  const BessConfig& bess = cfg.bess;
  const double kappa = bess.step_hours / bess.energy_capacity_kwh;
  const HCoefficients h{kappa / bess.efficiency, -kappa * bess.efficiency};

  std::vector<double> weights = cfg.cost_weights;
  if (weights.empty()) weights.assign(horizon, 1.0);
  if (static_cast<int>(weights.size()) != horizon)
    throw std::invalid_argument("scheduler: cost_weights length differs from horizon");
  for (double c : weights)
    if (c < 0.0) throw std::invalid_argument("scheduler: cost weights must be >= 0");

  Built b;
  b.horizon = horizon;
  auto& qp = b.qp;

  b.f0 = qp.num_vars();
  for (int t = 0; t < horizon; ++t) qp.add_variable(std::max(weights[t], kTinyWeight));
  auto add_split = [&](std::vector<int>& bound_rows) {
    const int base = qp.num_vars();
    for (int t = 0; t < horizon; ++t) {
      const int v = qp.add_variable(kTinyWeight);
      const int row = qp.add_row(0.0, kInf);
      qp.coeff(row, v, 1.0);
      bound_rows.push_back(row);
      b.row_family.push_back(Family::Sign);
      b.row_step.push_back(t);
    }
    return base;
  };
  b.hp0 = add_split(b.hp_bound);
  b.hm0 = add_split(b.hm_bound);
  b.lp0 = add_split(b.lp_bound);
  b.lm0 = add_split(b.lm_bound);

  // Split definitions: hp - hm = w_hi/dt + F  and  lp - lm = w_lo/dt + F.
  for (int t = 0; t < horizon; ++t) {
    int row = qp.add_row(forecasts.w_hi_kwh[t] / bess.step_hours,
                         forecasts.w_hi_kwh[t] / bess.step_hours);
    qp.coeff(row, b.hp0 + t, 1.0);
    qp.coeff(row, b.hm0 + t, -1.0);
    qp.coeff(row, b.f0 + t, -1.0);
    b.row_family.push_back(Family::Dynamics);
    b.row_step.push_back(t);

    row = qp.add_row(forecasts.w_lo_kwh[t] / bess.step_hours,
                     forecasts.w_lo_kwh[t] / bess.step_hours);
    qp.coeff(row, b.lp0 + t, 1.0);
    qp.coeff(row, b.lm0 + t, -1.0);
    qp.coeff(row, b.f0 + t, -1.0);
    b.row_family.push_back(Family::Dynamics);
    b.row_step.push_back(t);
  }

  auto add_slack = [&](int row, Family family, int step, double sign) {
    if (!cfg.soft_constraints) return;
    const int v = qp.add_variable(kTinyWeight, cfg.slack_penalty);
    const int bound = qp.add_row(0.0, kInf);
    qp.coeff(bound, v, 1.0);
    b.row_family.push_back(Family::Sign);
    b.row_step.push_back(step);
    qp.coeff(row, v, sign);
    b.slack_vars.push_back(v);
    b.slack_family.push_back(family);
    b.slack_step.push_back(step);
  };

  // Cumulative h terms of the low trajectory (hp/hm) up to and including
  // step `through`; `scale` premultiplies (the envelope slope, or 1).
  auto add_h_terms = [&](int row, int plus0, int minus0, int through, double scale) {
    for (int tau = 0; tau <= through; ++tau) {
      qp.coeff(row, plus0 + tau, scale * h.plus);
      qp.coeff(row, minus0 + tau, scale * h.minus);
    }
  };

  // SOC prediction-interval box: the low trajectory stays above soc_min, the
  // high trajectory below soc_max, at every end-of-step SOC.
  for (int t = 0; t < horizon; ++t) {
    int row = qp.add_row(-kInf, soc0 - bess.soc_min);
    add_h_terms(row, b.hp0, b.hm0, t, 1.0);
    b.row_family.push_back(Family::SocLower);
    b.row_step.push_back(t);
    add_slack(row, Family::SocLower, t, -1.0);

    row = qp.add_row(soc0 - bess.soc_max, kInf);
    add_h_terms(row, b.lp0, b.lm0, t, 1.0);
    b.row_family.push_back(Family::SocUpper);
    b.row_step.push_back(t);
    add_slack(row, Family::SocUpper, t, 1.0);
  }

  if (cfg.mode == SchedulerMode::Spc) {
    for (int t = 0; t < horizon; ++t) {
      int row = qp.add_row(-kInf, bess.rated_power_kw - forecasts.p_hi_kw[t]);
      qp.coeff(row, b.f0 + t, 1.0);
      b.row_family.push_back(Family::PowerUpper);
      b.row_step.push_back(t);
      add_slack(row, Family::PowerUpper, t, -1.0);

      row = qp.add_row(-bess.rated_power_kw - forecasts.p_lo_kw[t], kInf);
      qp.coeff(row, b.f0 + t, 1.0);
      b.row_family.push_back(Family::PowerLower);
      b.row_step.push_back(t);
      add_slack(row, Family::PowerLower, t, 1.0);
    }
    return b;
  }

  // DPC power constraints: every envelope line, evaluated on both SOC
  // prediction-interval trajectories, both at the start-of-step SOC
  // (history through t-1) and at the end-of-step SOC (history through t).
  const PowerEnvelope& env = cfg.envelope;
  if (env.upper.empty() || env.lower.empty())
    throw std::invalid_argument("scheduler: DPC mode requires an envelope");
  if (env.soc_lo > bess.soc_min || env.soc_hi < bess.soc_max)
    throw std::invalid_argument("scheduler: envelope domain narrower than the SOC limits");

  for (int t = 0; t < horizon; ++t) {
    for (const auto& line : env.upper) {
      const double rhs = line.a_kw + line.b_kw_per_soc * soc0 - forecasts.p_hi_kw[t];
      for (int through : {t - 1, t}) {
        for (auto [plus0, minus0] : {std::pair{b.hp0, b.hm0}, std::pair{b.lp0, b.lm0}}) {
          const int row = qp.add_row(-kInf, rhs);
          qp.coeff(row, b.f0 + t, 1.0);
          add_h_terms(row, plus0, minus0, through, line.b_kw_per_soc);
          b.row_family.push_back(Family::PowerUpper);
          b.row_step.push_back(t);
          add_slack(row, Family::PowerUpper, t, -1.0);
        }
      }
    }
    for (const auto& line : env.lower) {
      const double rhs = line.a_kw + line.b_kw_per_soc * soc0 - forecasts.p_lo_kw[t];
      for (int through : {t - 1, t}) {
        for (auto [plus0, minus0] : {std::pair{b.lp0, b.lm0}, std::pair{b.hp0, b.hm0}}) {
          const int row = qp.add_row(rhs, kInf);
          qp.coeff(row, b.f0 + t, 1.0);
          add_h_terms(row, plus0, minus0, through, line.b_kw_per_soc);
          b.row_family.push_back(Family::PowerLower);
          b.row_step.push_back(t);
          add_slack(row, Family::PowerLower, t, 1.0);
        }
      }
    }
  }
  return b;
}

void check_common(double soc0, const ForecastSet& forecasts, const SchedulerConfig& cfg) {
  validate(cfg.bess);
  if (cfg.horizon < 1) throw std::invalid_argument("scheduler: horizon must be >= 1");
  if (forecasts.horizon() != cfg.horizon)
    throw std::invalid_argument("scheduler: forecast horizon differs from config horizon");
  validate(forecasts, cfg.bess.step_hours);
  if (!(soc0 >= 0.0 && soc0 <= 1.0)) throw std::domain_error("scheduler: soc0 outside [0,1]");
}

double audit_complementarity(const Built& b, const QpSolution& sol) {
  double worst = 0.0;
  for (int t = 0; t < b.horizon; ++t) {
    worst = std::max(worst, std::min(sol.x[b.hp0 + t], sol.x[b.hm0 + t]));
    worst = std::max(worst, std::min(sol.x[b.lp0 + t], sol.x[b.lm0 + t]));
  }
  return worst;
}

void fix_signs(Built& b, const QpSolution& relaxed) {
  for (int t = 0; t < b.horizon; ++t) {
    const double net_h = relaxed.x[b.hp0 + t] - relaxed.x[b.hm0 + t];
    b.qp.upper[net_h >= 0.0 ? b.hm_bound[t] : b.hp_bound[t]] = 0.0;
    const double net_l = relaxed.x[b.lp0 + t] - relaxed.x[b.lm0 + t];
    b.qp.upper[net_l >= 0.0 ? b.lm_bound[t] : b.lp_bound[t]] = 0.0;
  }
}

std::string diagnose_infeasibility(const Built& b, const QpSolution& sol) {
  // Report the family with the largest constraint violation at the returned
  // iterate; ties go to the first family in enum order.
  std::vector<double> ax(b.qp.num_rows(), 0.0);
  for (const auto& t : b.qp.coefficients) ax[t.row] += t.value * sol.x[t.col];
  double worst = -1.0;
  Family worst_family = Family::SocLower;
  for (int i = 0; i < b.qp.num_rows(); ++i) {
    double v = 0.0;
    if (std::isfinite(b.qp.lower[i])) v = std::max(v, b.qp.lower[i] - ax[i]);
    if (std::isfinite(b.qp.upper[i])) v = std::max(v, ax[i] - b.qp.upper[i]);
    if (v > worst) {
      worst = v;
      worst_family = b.row_family[i];
    }
  }
  return family_name(worst_family);
}

ScheduleResult unpack(const Built& b, const QpSolution& sol, double soc0,
                      const ForecastSet& forecasts, const SchedulerConfig& cfg) {
  ScheduleResult r;
  r.solver_status = sol.status;
  r.iterations = sol.iterations;
  r.primal_residual = sol.primal_residual;
  r.dual_residual = sol.dual_residual;
  r.offsets_kw.assign(sol.x.begin() + b.f0, sol.x.begin() + b.f0 + b.horizon);

  std::vector<double> weights = cfg.cost_weights;
  if (weights.empty()) weights.assign(b.horizon, 1.0);
  for (int t = 0; t < b.horizon; ++t)
    r.objective_value += weights[t] * r.offsets_kw[t] * r.offsets_kw[t];

  r.soc_pi = soc_pi_trajectories(soc0, forecasts.w_lo_kwh, forecasts.w_hi_kwh, r.offsets_kw, cfg.bess);

  r.slack_per_step.assign(b.horizon, 0.0);
  for (size_t i = 0; i < b.slack_vars.size(); ++i) {
    const double s = sol.x[b.slack_vars[i]];
    switch (b.slack_family[i]) {
      case Family::SocLower: r.slack.soc_lower += s; break;
      case Family::SocUpper: r.slack.soc_upper += s; break;
      case Family::PowerUpper: r.slack.power_upper += s; break;
      case Family::PowerLower: r.slack.power_lower += s; break;
      default: break;
    }
    r.slack_per_step[b.slack_step[i]] += s;
  }
  r.max_complementarity_kw = audit_complementarity(b, sol);
  return r;
}

}  // namespace

const char* to_string(SchedulerMode mode) {
  switch (mode) {
    case SchedulerMode::Spc: return "spc";
    case SchedulerMode::Dpc: return "dpc";
    case SchedulerMode::DpcNoVoltage: return "dpc-nv";
  }
  return "?";
}

SchedulerMode scheduler_mode_from_string(const std::string& name) {
  if (name == "spc") return SchedulerMode::Spc;
  if (name == "dpc") return SchedulerMode::Dpc;
  if (name == "dpc-nv" || name == "dpc_no_voltage") return SchedulerMode::DpcNoVoltage;
  throw std::invalid_argument("unknown scheduler mode: " + name);
}

QuadraticProgram build_spc_problem(double soc0, const ForecastSet& forecasts,
                                   const SchedulerConfig& cfg) {
  check_common(soc0, forecasts, cfg);
  SchedulerConfig spc_cfg = cfg;
  spc_cfg.mode = SchedulerMode::Spc;
  return build_problem(soc0, forecasts, spc_cfg).qp;
}

QuadraticProgram build_dpc_problem(double soc0, const ForecastSet& forecasts,
                                   const SchedulerConfig& cfg) {
  check_common(soc0, forecasts, cfg);
  SchedulerConfig dpc_cfg = cfg;
  if (dpc_cfg.mode == SchedulerMode::Spc) dpc_cfg.mode = SchedulerMode::Dpc;
  return build_problem(soc0, forecasts, dpc_cfg).qp;
}

ScheduleResult schedule(double soc0, const ForecastSet& forecasts, const SchedulerConfig& cfg,
                        const QpSettings& solver) {
  check_common(soc0, forecasts, cfg);

  if (cfg.mode == SchedulerMode::Spc) {
    for (int t = 0; t < cfg.horizon; ++t) {
      if (forecasts.p_hi_kw[t] - forecasts.p_lo_kw[t] > 2.0 * cfg.bess.rated_power_kw) {
        // No offset can bring both forecast bounds inside +-B^r.
        ScheduleResult r;
        r.solver_status = QpStatus::Infeasible;
        r.infeasible_family = "power_static";
        return r;
      }
    }
  }

  Built built = build_problem(soc0, forecasts, cfg);
  QpSolution sol = solve(built.qp, solver);
  if (sol.status == QpStatus::Infeasible) {
    ScheduleResult r;
    r.solver_status = sol.status;
    r.iterations = sol.iterations;
    r.infeasible_family = sol.x.empty() ? "unknown" : diagnose_infeasibility(built, sol);
    return r;
  }

  ScheduleResult result = unpack(built, sol, soc0, forecasts, cfg);
  if (result.max_complementarity_kw > kComplementarityTol) {
    fix_signs(built, sol);
    QpSolution fixed = solve(built.qp, solver);
    if (fixed.status != QpStatus::Infeasible) {
      result = unpack(built, fixed, soc0, forecasts, cfg);
      result.sign_fix_applied = true;
    } else {
      result.solver_status = QpStatus::Infeasible;
      result.infeasible_family = diagnose_infeasibility(built, fixed);
      result.sign_fix_applied = true;
    }
  }
  return result;
}

void write_schedule_csv(const ScheduleResult& result, const std::string& path) {
  csv::Writer w(path, {"t", "F_kw", "soc_lo", "soc_hi", "slack_total"});
  for (size_t t = 0; t < result.offsets_kw.size(); ++t) {
    const double slack = t < result.slack_per_step.size() ? result.slack_per_step[t] : 0.0;
    w.row({std::to_string(t), csv::format(result.offsets_kw[t]), csv::format(result.soc_pi.soc_lo[t + 1]),
           csv::format(result.soc_pi.soc_hi[t + 1]), csv::format(slack)});
  }
}

}  // namespace bessched
