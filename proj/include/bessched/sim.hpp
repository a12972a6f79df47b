#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bessched/circuit.hpp"
#include "bessched/execution.hpp"
#include "bessched/forecast.hpp"
#include "bessched/scheduler.hpp"

namespace bessched {

/// Real-time service demand at 1 Hz, discharge-positive.
struct ServiceTrace {
  std::vector<double> power_kw;
  double duration_s() const { return static_cast<double>(power_kw.size()); }
};

struct ServiceSynthSpec {
  enum class Kind { Bursts, Steps, Mixed };
  Kind kind = Kind::Bursts;
  double duration_s = 7200.0;
  // Telegraph bursts: idle/burst segments with geometric lengths, random burst
  // sign, magnitude uniform in [min_burst_kw, amplitude_kw]. Zero-mean by
  // construction (power-intensive, energy-light).
  double amplitude_kw = 600.0;
  double min_burst_kw = 0.0;
  double duty = 0.3;
  double mean_burst_s = 40.0;
  // Piecewise-constant steps: (power_kw, duration_hours) back to back.
  std::vector<std::pair<double, double>> steps;
};

/// Deterministic for a fixed seed; all randomness comes from one mt19937_64
/// consumed in a fixed order.
ServiceTrace make_synthetic_service(const ServiceSynthSpec& spec, std::uint64_t seed);

struct SimRecord {
  double t_s = 0.0;
  double service_kw = 0.0;
  double offset_kw = 0.0;
  double battery_kw = 0.0;  // service + offset, always
  double soc = 0.0;         // at the start of the second
  double current_a = 0.0;
  double voltage_v = 0.0;
  bool saturated = false;  // power beyond the max-power-transfer apex
};

struct PeriodLog {
  double t_s = 0.0;
  double soc_at_solve = 0.0;
  double f0_kw = 0.0;
  QpStatus status = QpStatus::MaxIterations;
  double objective = 0.0;
  double slack_total = 0.0;
};

struct SimulationTrace {
  std::vector<SimRecord> records;
  std::vector<PeriodLog> scheduler_log;
  double final_soc = 0.0;
};

struct SimOptions {
  double period_s = 90.0;            // scheduler refresh period
  double oracle_r_multiplier = 1.0;  // plant-vs-model resistance mismatch knob
};

/// Two-timescale closed loop: the scheduler is re-solved from the measured
/// SOC every period and its first offset held; every second the plant oracle
/// applies service + offset, integrates SOC, and computes current/voltage by
/// inverting the circuit with the tabulated OCV. The oracle measures and
/// never clips: powers beyond the max-power-transfer apex are logged with the
/// current saturated at v_oc/(2R) and the run continues.
SimulationTrace run_closed_loop(const ServiceTrace& service, const SchedulerConfig& cfg,
                                const ForecastSet& forecasts, const CircuitParams& circuit,
                                double soc0, const SimOptions& options = {},
                                const QpSettings& solver = {});

struct ViolationEvent {
  int start_s = 0;
  int end_s = 0;  // inclusive
  double peak_current_a = 0.0;
  double limit_at_peak_a = 0.0;
  double peak_diff_a = 0.0;  // positive above the upper limit, negative below the lower
  bool upper = true;
};

struct ViolationReport {
  int n_violations = 0;
  std::optional<double> mean_peak_diff_upper_a;
  std::optional<double> variance_upper;
  std::optional<double> mean_peak_diff_lower_a;
  std::optional<double> variance_lower;
  std::vector<ViolationEvent> events;
};

/// Scores current-limit violations against the SOC-dependent limits derived
/// from feasible_power at each second's SOC. An event is a maximal contiguous
/// run of seconds beyond one limit; per-event peak differences aggregate into
/// a population mean/variance per side.
ViolationReport assess_violations(const SimulationTrace& trace, const CircuitParams& circuit,
                                  Execution execution = Execution::Serial);

/// Scenario inputs for the initial-SOC sweep. Cells with soc0 at or above
/// high_soc_threshold use the high-range service/forecasts when provided.
struct SweepScenario {
  ServiceTrace service;
  ForecastSet forecasts;
  std::optional<ServiceTrace> service_high;
  std::optional<ForecastSet> forecasts_high;
  double high_soc_threshold = 0.55;
};

struct SweepCell {
  double soc0 = 0.0;
  SchedulerMode mode = SchedulerMode::Spc;
  ViolationReport report;
};

/// One closed-loop run per (soc0, mode) pair; cells are independent and run
/// concurrently under Execution::Parallel, aggregated in (soc0, mode) order.
/// base_cfg.envelope serves the DPC cells; the no-voltage variant is rebuilt
/// from the circuit with the same SOC domain.
std::vector<SweepCell> sweep_initial_soc(const SweepScenario& scenario,
                                         std::span<const double> soc0_list,
                                         std::span<const SchedulerMode> modes,
                                         const SchedulerConfig& base_cfg,
                                         const CircuitParams& circuit,
                                         const SimOptions& options = {},
                                         const QpSettings& solver = {},
                                         Execution execution = Execution::Parallel);

ServiceTrace read_service_csv(const std::string& path);
void write_service_csv(const ServiceTrace& trace, const std::string& path);
void write_trace_csv(const SimulationTrace& trace, const std::string& path);
/// Table-shaped CSV: `mode,n_violations,mean_upper,var_upper,mean_lower,var_lower,soc0`,
/// with `-` for sides without events.
void write_violation_csv(std::span<const SweepCell> cells, const std::string& path);

}  // namespace bessched
