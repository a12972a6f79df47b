#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>

#include "bessched/csvio.hpp"
#include "bessched/envelope.hpp"
#include "bessched/svg.hpp"

namespace bessched::cli {

namespace {

namespace fs = std::filesystem;

struct Prepared {
  ScenarioConfig scenario;
  std::string out;
};

Prepared prepare(const GlobalOptions& options) {
  Prepared p;
  p.scenario = load_config(options.config_path);
  if (options.seed) p.scenario.service.seed = *options.seed;
  p.out = options.out_dir.value_or(p.scenario.out_dir);
  fs::create_directories(p.out);
  return p;
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

std::vector<SchedulerMode> requested_modes(const GlobalOptions& options,
                                           const ScenarioConfig& scenario) {
  if (!options.mode) return {scenario.mode};
  if (*options.mode == "all")
    return {SchedulerMode::Spc, SchedulerMode::Dpc, SchedulerMode::DpcNoVoltage};
  return {scheduler_mode_from_string(*options.mode)};
}

SchedulerConfig scheduler_config(const ScenarioConfig& scenario, SchedulerMode mode) {
  SchedulerConfig cfg;
  cfg.mode = mode;
  cfg.horizon = scenario.horizon;
  cfg.soft_constraints = scenario.soft_constraints;
  cfg.slack_penalty = scenario.slack_penalty;
  cfg.bess = scenario.bess;
  if (mode != SchedulerMode::Spc) {
    EnvelopeBuildOptions opts = scenario.envelope;
    opts.include_voltage = mode == SchedulerMode::Dpc;
    cfg.envelope = build_envelope(scenario.circuit, opts);
  }
  return cfg;
}

int run_guarded(const GlobalOptions& options, int (*body)(const GlobalOptions&)) {
  try {
    return body(options);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

std::vector<std::pair<double, double>> boundary_points(const PowerEnvelope& env, bool upper,
                                                       int samples = 101) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < samples; ++i) {
    const double s = env.soc_lo + (env.soc_hi - env.soc_lo) * i / (samples - 1);
    pts.emplace_back(s, upper ? env.upper_at(s) : env.lower_at(s));
  }
  return pts;
}

int envelope_body(const GlobalOptions& options) {
  const Prepared p = prepare(options);
  const PowerEnvelope env = build_envelope(p.scenario.circuit, p.scenario.envelope);
  write_envelope_csv(env, join(p.out, "envelope.csv"));
  write_boundary_csv(env, join(p.out, "boundary.csv"), p.scenario.envelope.sample_count);

  EnvelopeBuildOptions nv_opts = p.scenario.envelope;
  nv_opts.include_voltage = false;
  const PowerEnvelope nv = build_envelope(p.scenario.circuit, nv_opts);
  EnvelopeBuildOptions full_opts = p.scenario.envelope;
  full_opts.include_voltage = true;
  const PowerEnvelope full = build_envelope(p.scenario.circuit, full_opts);

  svg::write_chart(join(p.out, "envelope.svg"), "Feasible battery power vs SOC", "SOC [-]",
                   "power [kW]",
                   {{boundary_points(full, true), "#1f77b4", "upper (V+I limits)", false, false, 2.0},
                    {boundary_points(full, false), "#1f77b4", "lower (V+I limits)", false, false, 2.0},
                    {boundary_points(nv, true), "#333333", "upper (I limits only)", false, true, 1.5},
                    {boundary_points(nv, false), "#333333", "lower (I limits only)", false, true, 1.5}});
  return kExitOk;
}

int schedule_body(const GlobalOptions& options) {
  const Prepared p = prepare(options);
  const ForecastSet forecasts =
      resolve_forecasts(p.scenario.forecast, p.scenario.horizon, p.scenario.config_dir);
  const PowerEnvelope dpc_env = build_envelope(p.scenario.circuit, [&] {
    EnvelopeBuildOptions o = p.scenario.envelope;
    o.include_voltage = true;
    return o;
  }());

  for (SchedulerMode mode : requested_modes(options, p.scenario)) {
    const SchedulerConfig cfg = scheduler_config(p.scenario, mode);
    const ScheduleResult result = schedule(p.scenario.soc0, forecasts, cfg, p.scenario.solver);
    if (result.solver_status == QpStatus::Infeasible) {
      std::cerr << "error: " << to_string(mode)
                << " schedule infeasible, binding family: " << result.infeasible_family << "\n";
      return kExitInfeasible;
    }
    if (result.solver_status == QpStatus::MaxIterations) {
      std::cerr << "error: solver hit the iteration limit\n";
      return kExitSolverFailure;
    }
    const std::string tag = to_string(mode);
    write_schedule_csv(result, join(p.out, "schedule_" + tag + ".csv"));

    std::vector<std::pair<double, double>> battery_hi, spc_hi, spc_lo, dpc_hi, dpc_lo;
    for (size_t t = 0; t < result.offsets_kw.size(); ++t) {
      const double ts = static_cast<double>(t);
      battery_hi.emplace_back(ts, forecasts.p_hi_kw[t] + result.offsets_kw[t]);
      spc_hi.emplace_back(ts, p.scenario.bess.rated_power_kw);
      spc_lo.emplace_back(ts, -p.scenario.bess.rated_power_kw);
      const double soc_lo_t = std::clamp(result.soc_pi.soc_lo[t], dpc_env.soc_lo, dpc_env.soc_hi);
      const double soc_hi_t = std::clamp(result.soc_pi.soc_hi[t], dpc_env.soc_lo, dpc_env.soc_hi);
      dpc_hi.emplace_back(ts, dpc_env.upper_at(soc_lo_t));
      dpc_lo.emplace_back(ts, dpc_env.lower_at(soc_hi_t));
    }
    svg::write_chart(join(p.out, "schedule_" + tag + ".svg"),
                     "Scheduled battery power (" + tag + ")", "step", "power [kW]",
                     {{battery_hi, "#1f77b4", "power upper bound + offset", false, false, 2.0},
                      {spc_hi, "#d62728", "static limit", false, true, 1.5},
                      {spc_lo, "#d62728", "", false, true, 1.5},
                      {dpc_hi, "#2ca02c", "SOC-dependent limit", false, false, 1.5},
                      {dpc_lo, "#2ca02c", "", false, false, 1.5}});
  }
  return kExitOk;
}

void write_current_chart(const SimulationTrace& trace, const ViolationReport& report,
                         const CircuitParams& circuit, const std::string& path,
                         const std::string& title) {
  const int n = static_cast<int>(trace.records.size());
  const int stride = std::max(1, n / 2000);
  std::vector<std::pair<double, double>> current, hi, lo, markers;
  for (int s = 0; s < n; s += stride) {
    const auto& r = trace.records[s];
    const double soc = std::clamp(r.soc, 0.0, 1.0);
    const PowerBounds b = feasible_power(circuit, soc);
    current.emplace_back(r.t_s, r.current_a);
    hi.emplace_back(r.t_s, current_from_power(circuit, soc, b.p_hi_kw));
    lo.emplace_back(r.t_s, current_from_power(circuit, soc, b.p_lo_kw));
  }
  for (const auto& ev : report.events) {
    const auto& r = trace.records[ev.start_s];
    markers.emplace_back(r.t_s, ev.peak_current_a);
  }
  std::vector<svg::Series> series{{current, "#1f77b4", "battery current", false, false, 1.0},
                                  {hi, "#2ca02c", "upper limit", false, true, 1.5},
                                  {lo, "#2ca02c", "lower limit", false, true, 1.5}};
  if (!markers.empty()) series.push_back({markers, "#d62728", "violations", true, false, 1.0});
  svg::write_chart(path, title, "time [s]", "current [A]", series);
}

int simulate_body(const GlobalOptions& options) {
  const Prepared p = prepare(options);
  const ForecastSet forecasts =
      resolve_forecasts(p.scenario.forecast, p.scenario.horizon, p.scenario.config_dir);
  const ServiceTrace service = resolve_service(p.scenario.service, p.scenario.config_dir);
  SimOptions sim_options;
  sim_options.period_s = p.scenario.period_s;
  sim_options.oracle_r_multiplier = p.scenario.oracle_r_multiplier;

  std::vector<SweepCell> cells;
  for (SchedulerMode mode : requested_modes(options, p.scenario)) {
    const SchedulerConfig cfg = scheduler_config(p.scenario, mode);
    const SimulationTrace trace =
        run_closed_loop(service, cfg, forecasts, p.scenario.circuit, p.scenario.soc0, sim_options,
                        p.scenario.solver);
    const ViolationReport report = assess_violations(trace, p.scenario.circuit);
    const std::string tag = to_string(mode);
    write_trace_csv(trace, join(p.out, "trace_" + tag + ".csv"));
    write_current_chart(trace, report, p.scenario.circuit, join(p.out, "current_" + tag + ".svg"),
                        "Battery current and SOC-dependent limits (" + tag + ")");
    cells.push_back({p.scenario.soc0, mode, report});
  }
  write_violation_csv(cells, join(p.out, "violations.csv"));
  return kExitOk;
}

int sweep_body(const GlobalOptions& options) {
  const Prepared p = prepare(options);
  if (!p.scenario.sweep) throw ConfigError("config: 'sweep' section missing");
  const SweepSpec& spec = *p.scenario.sweep;

  SweepScenario scenario;
  scenario.service = resolve_service(p.scenario.service, p.scenario.config_dir);
  scenario.forecasts =
      resolve_forecasts(p.scenario.forecast, p.scenario.horizon, p.scenario.config_dir);
  scenario.high_soc_threshold = spec.high_soc_threshold;
  if (spec.service_high)
    scenario.service_high = resolve_service(*spec.service_high, p.scenario.config_dir);
  if (spec.p_hi_kw_high)
    scenario.forecasts_high = constant_forecasts(p.scenario.horizon, *spec.p_hi_kw_high,
                                                 *spec.p_lo_kw_high, *spec.w_hi_kwh_high,
                                                 *spec.w_lo_kwh_high);

  SimOptions sim_options;
  sim_options.period_s = p.scenario.period_s;
  sim_options.oracle_r_multiplier = p.scenario.oracle_r_multiplier;
  const SchedulerConfig base = scheduler_config(p.scenario, SchedulerMode::Dpc);

  const std::vector<SweepCell> cells =
      sweep_initial_soc(scenario, spec.soc0_list, spec.modes, base, p.scenario.circuit,
                        sim_options, p.scenario.solver, Execution::Parallel);
  write_violation_csv(cells, join(p.out, "violations.csv"));

  std::vector<svg::Series> series;
  const char* colors[] = {"#d62728", "#1f77b4", "#2ca02c"};
  int color = 0;
  for (SchedulerMode mode : spec.modes) {
    svg::Series s;
    s.color = colors[color++ % 3];
    s.label = to_string(mode);
    for (const auto& c : cells)
      if (c.mode == mode) s.points.emplace_back(c.soc0, c.report.n_violations);
    series.push_back(std::move(s));
  }
  svg::write_chart(join(p.out, "sweep.svg"), "Current-limit violations vs initial SOC",
                   "initial SOC [-]", "violation events", series);
  return kExitOk;
}

int forecast_body(const GlobalOptions& options) {
  const Prepared p = prepare(options);
  const ServiceTrace history = resolve_service(p.scenario.service, p.scenario.config_dir);
  const ForecastSet f = estimate_forecasts(history.power_kw, p.scenario.resample_s, p.scenario.q_lo,
                                           p.scenario.q_hi, 1);
  csv::Writer w(join(p.out, "pis.csv"), {"p_lo_kw", "p_hi_kw", "w_lo_kwh", "w_hi_kwh"});
  w.row({csv::format(f.p_lo_kw[0]), csv::format(f.p_hi_kw[0]), csv::format(f.w_lo_kwh[0]),
         csv::format(f.w_hi_kwh[0])});
  return kExitOk;
}

}  // namespace

int cmd_envelope(const GlobalOptions& options) {
  return run_guarded(options, envelope_body);
}
int cmd_schedule(const GlobalOptions& options) {
  return run_guarded(options, schedule_body);
}
int cmd_simulate(const GlobalOptions& options) {
  return run_guarded(options, simulate_body);
}
int cmd_sweep(const GlobalOptions& options) {
  return run_guarded(options, sweep_body);
}
int cmd_forecast(const GlobalOptions& options) {
  return run_guarded(options, forecast_body);
}

}  // namespace bessched::cli
