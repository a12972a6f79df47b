#include "bessched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>

#include "bessched/csvio.hpp"
#include "bessched/envelope.hpp"

namespace bessched {

namespace {

constexpr double kWattsPerKw = 1000.0;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Geometric segment length with the given mean, via inverse CDF. Hand-rolled
// so traces do not depend on standard-library distribution internals.
int geometric_length(std::mt19937_64& rng, double mean) {
  const double p = 1.0 / std::max(mean, 1.0);
  const double u = uniform01(rng);
  if (p >= 1.0) return 1;
  return 1 + static_cast<int>(std::log1p(-u) / std::log1p(-p));
}

std::vector<double> make_bursts(const ServiceSynthSpec& spec, std::mt19937_64& rng) {
  const int n = static_cast<int>(spec.duration_s);
  std::vector<double> power(n, 0.0);
  const double duty = std::clamp(spec.duty, 0.01, 0.99);
  const double mean_idle = spec.mean_burst_s * (1.0 - duty) / duty;
  int t = 0;
  while (t < n) {
    t += geometric_length(rng, mean_idle);
    const int len = geometric_length(rng, spec.mean_burst_s);
    const double sign = (rng() & 1) ? 1.0 : -1.0;
    const double magnitude =
        spec.min_burst_kw + (spec.amplitude_kw - spec.min_burst_kw) * uniform01(rng);
    for (int k = 0; k < len && t + k < n; ++k) power[t + k] = sign * magnitude;
    t += len;
  }
  return power;
}

std::vector<double> make_steps(const ServiceSynthSpec& spec) {
  const int n = static_cast<int>(spec.duration_s);
  std::vector<double> power(n, 0.0);
  int t = 0;
  for (const auto& [kw, hours] : spec.steps) {
    const int len = static_cast<int>(hours * 3600.0);
    for (int k = 0; k < len && t + k < n; ++k) power[t + k] = kw;
    t += len;
  }
  return power;
}

struct PlantState {
  double current_a = 0.0;
  double voltage_v = 0.0;
  bool saturated = false;
};

// Circuit inversion with the tabulated OCV (the plant knows the real curve,
// the scheduler only its linear fit).
PlantState plant_measure(const CircuitParams& circuit, double soc, double power_kw) {
  PlantState s;
  const double voc = ocv_table_at(circuit.ocv, soc);
  const double r = circuit.series_resistance_ohm;
  const double p_w = power_kw * kWattsPerKw;
  const double disc = voc * voc - 4.0 * r * p_w;
  if (disc < 0.0) {
    s.saturated = true;
    s.current_a = voc / (2.0 * r);
  } else {
    s.current_a = (voc - std::sqrt(disc)) / (2.0 * r);
  }
  s.voltage_v = voc - r * s.current_a;
  return s;
}

struct SideStats {
  std::optional<double> mean;
  std::optional<double> variance;
};

SideStats side_stats(const std::vector<double>& peaks) {
  SideStats s;
  if (peaks.empty()) return s;
  double mean = 0.0;
  for (double p : peaks) mean += p;
  mean /= peaks.size();
  double var = 0.0;
  for (double p : peaks) var += (p - mean) * (p - mean);
  var /= peaks.size();  // population variance
  s.mean = mean;
  s.variance = var;
  return s;
}

std::string opt_field(const std::optional<double>& v) {
  return v ? csv::format(*v) : "-";
}

}  // namespace

ServiceTrace make_synthetic_service(const ServiceSynthSpec& spec, std::uint64_t seed) {
  if (spec.duration_s < 1.0) throw std::invalid_argument("synthetic service: duration too short");
  std::mt19937_64 rng(seed);
  ServiceTrace trace;
  switch (spec.kind) {
    case ServiceSynthSpec::Kind::Bursts:
      trace.power_kw = make_bursts(spec, rng);
      break;
    case ServiceSynthSpec::Kind::Steps:
      trace.power_kw = make_steps(spec);
      break;
    case ServiceSynthSpec::Kind::Mixed: {
      trace.power_kw = make_bursts(spec, rng);
      const auto steps = make_steps(spec);
      for (size_t i = 0; i < trace.power_kw.size(); ++i) trace.power_kw[i] += steps[i];
      break;
    }
  }
  return trace;
}

SimulationTrace run_closed_loop(const ServiceTrace& service, const SchedulerConfig& cfg,
                                const ForecastSet& forecasts, const CircuitParams& circuit,
                                double soc0, const SimOptions& options, const QpSettings& solver) {
  validate(circuit);
  validate(cfg.bess);
  const int n = static_cast<int>(service.power_kw.size());
  const int period = static_cast<int>(options.period_s);
  if (n < period) throw std::invalid_argument("run_closed_loop: trace shorter than one period");

  CircuitParams plant = circuit;
  plant.series_resistance_ohm *= options.oracle_r_multiplier;

  BessConfig second = cfg.bess;
  second.step_hours = 1.0 / 3600.0;

  SimulationTrace trace;
  trace.records.resize(n);
  double soc = soc0;
  double f0 = 0.0;

  for (int s = 0; s < n; ++s) {
    if (s % period == 0) {
      const double soc_for_solve = std::clamp(soc, 0.0, 1.0);
      const ScheduleResult r = schedule(soc_for_solve, forecasts, cfg, solver);
      f0 = r.solver_status == QpStatus::Infeasible ? 0.0 : r.offsets_kw.front();
      trace.scheduler_log.push_back({static_cast<double>(s), soc_for_solve, f0, r.solver_status,
                                     r.objective_value, r.slack.total()});
    }
    SimRecord& rec = trace.records[s];
    rec.t_s = s;
    rec.service_kw = service.power_kw[s];
    rec.offset_kw = f0;
    rec.battery_kw = rec.service_kw + rec.offset_kw;
    rec.soc = soc;
    const PlantState st = plant_measure(plant, soc, rec.battery_kw);
    rec.current_a = st.current_a;
    rec.voltage_v = st.voltage_v;
    rec.saturated = st.saturated;
    soc -= h_step(rec.battery_kw, second);
  }
  trace.final_soc = soc;
  return trace;
}

ViolationReport assess_violations(const SimulationTrace& trace, const CircuitParams& circuit,
                                  Execution execution) {
  const int n = static_cast<int>(trace.records.size());
  if (n == 0) throw std::invalid_argument("assess_violations: empty trace");

  // SOC-dependent current limits per second; the limit computation is
  // pointwise and carries the parallel loop, the event scan stays serial.
  std::vector<double> i_hi(n), i_lo(n);
  auto limits_at = [&](int s) {
    const double soc = std::clamp(trace.records[s].soc, 0.0, 1.0);
    const PowerBounds b = feasible_power(circuit, soc);
    i_hi[s] = current_from_power(circuit, soc, b.p_hi_kw);
    i_lo[s] = current_from_power(circuit, soc, b.p_lo_kw);
  };
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (int s = 0; s < n; ++s) limits_at(s);
  } else {
    for (int s = 0; s < n; ++s) limits_at(s);
  }

  ViolationReport report;
  std::vector<double> upper_peaks, lower_peaks;
  auto scan_side = [&](bool upper) {
    std::vector<double>& peaks = upper ? upper_peaks : lower_peaks;
    int s = 0;
    while (s < n) {
      const double diff0 = upper ? trace.records[s].current_a - i_hi[s]
                                 : trace.records[s].current_a - i_lo[s];
      if ((upper && diff0 <= 0.0) || (!upper && diff0 >= 0.0)) {
        ++s;
        continue;
      }
      ViolationEvent ev;
      ev.upper = upper;
      ev.start_s = s;
      ev.peak_diff_a = diff0;
      ev.peak_current_a = trace.records[s].current_a;
      ev.limit_at_peak_a = upper ? i_hi[s] : i_lo[s];
      while (s < n) {
        const double diff = upper ? trace.records[s].current_a - i_hi[s]
                                  : trace.records[s].current_a - i_lo[s];
        if ((upper && diff <= 0.0) || (!upper && diff >= 0.0)) break;
        if ((upper && diff > ev.peak_diff_a) || (!upper && diff < ev.peak_diff_a)) {
          ev.peak_diff_a = diff;
          ev.peak_current_a = trace.records[s].current_a;
          ev.limit_at_peak_a = upper ? i_hi[s] : i_lo[s];
        }
        ev.end_s = s;
        ++s;
      }
      peaks.push_back(ev.peak_diff_a);
      report.events.push_back(ev);
    }
  };
  scan_side(true);
  scan_side(false);

  report.n_violations = static_cast<int>(report.events.size());
  const SideStats up = side_stats(upper_peaks);
  const SideStats lo = side_stats(lower_peaks);
  report.mean_peak_diff_upper_a = up.mean;
  report.variance_upper = up.variance;
  report.mean_peak_diff_lower_a = lo.mean;
  report.variance_lower = lo.variance;
  return report;
}

std::vector<SweepCell> sweep_initial_soc(const SweepScenario& scenario,
                                         std::span<const double> soc0_list,
                                         std::span<const SchedulerMode> modes,
                                         const SchedulerConfig& base_cfg,
                                         const CircuitParams& circuit, const SimOptions& options,
                                         const QpSettings& solver, Execution execution) {
  // The no-voltage envelope shares the DPC envelope's SOC domain.
  EnvelopeBuildOptions nv_opts;
  nv_opts.include_voltage = false;
  nv_opts.soc_lo = base_cfg.envelope.soc_lo;
  nv_opts.soc_hi = base_cfg.envelope.soc_hi;
  const PowerEnvelope nv_envelope = build_envelope(circuit, nv_opts);

  const int n_cells = static_cast<int>(soc0_list.size() * modes.size());
  std::vector<SweepCell> cells(n_cells);
  std::vector<std::exception_ptr> errors(n_cells);

  auto run_cell = [&](int idx) {
    const double soc0 = soc0_list[idx / modes.size()];
    const SchedulerMode mode = modes[idx % modes.size()];
    const bool high = soc0 >= scenario.high_soc_threshold && scenario.service_high.has_value();
    const ServiceTrace& service = high ? *scenario.service_high : scenario.service;
    const ForecastSet& forecasts =
        high && scenario.forecasts_high ? *scenario.forecasts_high : scenario.forecasts;

    SchedulerConfig cfg = base_cfg;
    cfg.mode = mode;
    if (mode == SchedulerMode::DpcNoVoltage) cfg.envelope = nv_envelope;

    SweepCell cell;
    cell.soc0 = soc0;
    cell.mode = mode;
    const SimulationTrace trace =
        run_closed_loop(service, cfg, forecasts, circuit, soc0, options, solver);
    cell.report = assess_violations(trace, circuit);
    cells[idx] = std::move(cell);
  };

  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < n_cells; ++idx) {
      try {
        run_cell(idx);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  } else {
    for (int idx = 0; idx < n_cells; ++idx) {
      try {
        run_cell(idx);
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return cells;
}

ServiceTrace read_service_csv(const std::string& path) {
  return {read_power_trace_csv(path)};
}

void write_service_csv(const ServiceTrace& trace, const std::string& path) {
  csv::Writer w(path, {"t_s", "power_kw"});
  for (size_t s = 0; s < trace.power_kw.size(); ++s)
    w.row({std::to_string(s), csv::format(trace.power_kw[s])});
}

void write_trace_csv(const SimulationTrace& trace, const std::string& path) {
  csv::Writer w(path, {"t_s", "service_kw", "offset_kw", "battery_kw", "soc", "current_a", "voltage_v"});
  for (const auto& r : trace.records)
    w.row({csv::format(r.t_s), csv::format(r.service_kw), csv::format(r.offset_kw),
           csv::format(r.battery_kw), csv::format(r.soc), csv::format(r.current_a),
           csv::format(r.voltage_v)});
}

void write_violation_csv(std::span<const SweepCell> cells, const std::string& path) {
  csv::Writer w(path, {"mode", "n_violations", "mean_upper", "var_upper", "mean_lower", "var_lower", "soc0"});
  for (const auto& c : cells)
    w.row({to_string(c.mode), std::to_string(c.report.n_violations),
           opt_field(c.report.mean_peak_diff_upper_a), opt_field(c.report.variance_upper),
           opt_field(c.report.mean_peak_diff_lower_a), opt_field(c.report.variance_lower),
           csv::format(c.soc0)});
}

}  // namespace bessched
