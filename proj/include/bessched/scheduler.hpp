#pragma once

#include <string>
#include <vector>

#include "bessched/envelope.hpp"
#include "bessched/forecast.hpp"
#include "bessched/qp.hpp"
#include "bessched/soc.hpp"

namespace bessched {

enum class SchedulerMode { Spc, Dpc, DpcNoVoltage };

const char* to_string(SchedulerMode mode);
SchedulerMode scheduler_mode_from_string(const std::string& name);

struct SchedulerConfig {
  SchedulerMode mode = SchedulerMode::Dpc;
  int horizon = 16;                  // number of scheduling intervals
  std::vector<double> cost_weights;  // c_t, empty means all ones
  bool soft_constraints = true;
  double slack_penalty = 1e6;        // linear cost per unit of constraint slack
  PowerEnvelope envelope;            // consulted by the DPC modes only
  BessConfig bess;
};

struct SlackUsage {
  double soc_lower = 0.0;
  double soc_upper = 0.0;
  double power_upper = 0.0;
  double power_lower = 0.0;
  double total() const { return soc_lower + soc_upper + power_upper + power_lower; }
};

struct ScheduleResult {
  std::vector<double> offsets_kw;  // F_0 .. F_{horizon-1}
  SocTrajectory soc_pi;            // horizon+1 entries per side, from the solved offsets
  SlackUsage slack;
  std::vector<double> slack_per_step;
  QpStatus solver_status = QpStatus::MaxIterations;
  double objective_value = 0.0;  // sum c_t F_t^2, excluding slack penalties
  double max_complementarity_kw = 0.0;
  bool sign_fix_applied = false;
  std::string infeasible_family;  // diagnosis when infeasible
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

/// Offset scheduler with static power bounds +-B^r on both power forecast
/// bounds, plus SOC prediction-interval box constraints. The signed battery
/// power inside the SOC dynamics is split into nonnegative charge/discharge
/// parts so the efficiency function stays affine.
QuadraticProgram build_spc_problem(double soc0, const ForecastSet& forecasts,
                                   const SchedulerConfig& cfg);

/// Same skeleton with the power bounds replaced by the envelope lines,
/// evaluated on both SOC prediction-interval trajectories and at both the
/// start-of-step and end-of-step SOC.
QuadraticProgram build_dpc_problem(double soc0, const ForecastSet& forecasts,
                                   const SchedulerConfig& cfg);

/// Builds per mode, solves, audits charge/discharge complementarity (with a
/// sign-fixing re-solve when violated beyond 1e-3 kW) and unpacks the result.
ScheduleResult schedule(double soc0, const ForecastSet& forecasts, const SchedulerConfig& cfg,
                        const QpSettings& solver = {});

/// CSV export: header `t,F_kw,soc_lo,soc_hi,slack_total`, one row per step.
void write_schedule_csv(const ScheduleResult& result, const std::string& path);

}  // namespace bessched
