#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bessched/circuit.hpp"
#include "bessched/envelope.hpp"
#include "bessched/forecast.hpp"
#include "bessched/qp.hpp"
#include "bessched/scheduler.hpp"
#include "bessched/sim.hpp"

namespace bessched::cli {

/// Configuration problems map to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ForecastSource {
  std::optional<std::string> file;  // PI CSV written by the `forecast` command
  std::optional<ForecastSet> constants;  // single-entry values, replicated
  double p_hi_kw = 0, p_lo_kw = 0, w_hi_kwh = 0, w_lo_kwh = 0;
  bool use_constants = false;
};

struct ServiceSource {
  std::optional<std::string> file;
  std::optional<ServiceSynthSpec> synthetic;
  std::uint64_t seed = 42;
};

struct SweepSpec {
  std::vector<double> soc0_list;
  std::vector<SchedulerMode> modes;
  std::optional<ServiceSource> service_high;
  std::optional<double> p_hi_kw_high, p_lo_kw_high, w_hi_kwh_high, w_lo_kwh_high;
  double high_soc_threshold = 0.55;
};

struct ScenarioConfig {
  CircuitParams circuit;
  BessConfig bess;
  SchedulerMode mode = SchedulerMode::Dpc;
  int horizon = 16;
  bool soft_constraints = true;
  double slack_penalty = 1e6;
  EnvelopeBuildOptions envelope;
  ForecastSource forecast;
  ServiceSource service;
  double soc0 = 0.5;
  double period_s = 90.0;
  double oracle_r_multiplier = 1.0;
  std::optional<SweepSpec> sweep;
  QpSettings solver;
  std::string out_dir = "out";
  std::string config_dir;  // directory of the config file, for relative paths
};

/// Parses the JSON scenario document. Relative file references resolve
/// against the config file's directory.
ScenarioConfig load_config(const std::string& path);

ForecastSet resolve_forecasts(const ForecastSource& source, int horizon,
                              const std::string& base_dir);
ServiceTrace resolve_service(const ServiceSource& source, const std::string& base_dir);

}  // namespace bessched::cli
