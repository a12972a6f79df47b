#include "config.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "bessched/csvio.hpp"

namespace bessched::cli {

namespace {

using nlohmann::json;

std::string resolve_path(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

double require_number(const json& node, const char* key) {
  if (!node.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
  if (!node[key].is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return node[key].get<double>();
}

double number_or(const json& node, const char* key, double fallback) {
  if (!node.contains(key)) return fallback;
  return node[key].get<double>();
}

CircuitParams parse_circuit(const json& node, const std::string& base_dir) {
  CircuitParams p;
  if (!node.contains("ocv")) throw ConfigError("config: circuit.ocv missing");
  const json& ocv = node["ocv"];
  const double fit_lo = ocv.contains("fit_range") ? ocv["fit_range"][0].get<double>() : 0.0;
  const double fit_hi = ocv.contains("fit_range") ? ocv["fit_range"][1].get<double>() : 1.0;
  if (ocv.contains("csv")) {
    const std::string path = resolve_path(base_dir, ocv["csv"].get<std::string>());
    if (!std::filesystem::exists(path)) throw ConfigError("config: OCV file not found: " + path);
    p.ocv = fit_ocv(read_ocv_csv(path), fit_lo, fit_hi);
  } else if (ocv.contains("samples")) {
    std::vector<OcvSample> samples;
    for (const auto& s : ocv["samples"]) samples.push_back({s[0].get<double>(), s[1].get<double>()});
    p.ocv = fit_ocv(std::move(samples), fit_lo, fit_hi);
  } else if (ocv.contains("intercept_v")) {
    p.ocv = linear_ocv(require_number(ocv, "intercept_v"), require_number(ocv, "slope_v"));
  } else {
    throw ConfigError("config: circuit.ocv needs 'csv', 'samples' or 'intercept_v'/'slope_v'");
  }
  p.series_resistance_ohm = require_number(node, "series_resistance_ohm");
  p.v_min_volt = require_number(node, "v_min_volt");
  p.v_max_volt = require_number(node, "v_max_volt");
  p.i_max_amp = require_number(node, "i_max_amp");
  return p;
}

BessConfig parse_bess(const json& node) {
  BessConfig c;
  c.energy_capacity_kwh = require_number(node, "energy_capacity_kwh");
  c.rated_power_kw = require_number(node, "rated_power_kw");
  c.efficiency = number_or(node, "efficiency", 0.95);
  c.soc_min = number_or(node, "soc_min", 0.05);
  c.soc_max = number_or(node, "soc_max", 0.95);
  c.step_hours = require_number(node, "step_hours");
  return c;
}

ServiceSynthSpec parse_synth(const json& node) {
  ServiceSynthSpec s;
  const std::string kind = node.value("kind", "bursts");
  if (kind == "bursts")
    s.kind = ServiceSynthSpec::Kind::Bursts;
  else if (kind == "steps")
    s.kind = ServiceSynthSpec::Kind::Steps;
  else if (kind == "mixed")
    s.kind = ServiceSynthSpec::Kind::Mixed;
  else
    throw ConfigError("config: unknown synthetic service kind: " + kind);
  s.duration_s = require_number(node, "duration_s");
  s.amplitude_kw = number_or(node, "amplitude_kw", 600.0);
  s.min_burst_kw = number_or(node, "min_burst_kw", 0.0);
  s.duty = number_or(node, "duty", 0.3);
  s.mean_burst_s = number_or(node, "mean_burst_s", 40.0);
  if (node.contains("steps"))
    for (const auto& st : node["steps"])
      s.steps.emplace_back(st[0].get<double>(), st[1].get<double>());
  return s;
}

ServiceSource parse_service(const json& node) {
  ServiceSource s;
  if (node.contains("csv")) {
    s.file = node["csv"].get<std::string>();
  } else if (node.contains("synthetic")) {
    s.synthetic = parse_synth(node["synthetic"]);
    s.seed = node["synthetic"].value("seed", 42u);
  } else {
    throw ConfigError("config: service needs exactly one of 'csv' or 'synthetic'");
  }
  if (node.contains("csv") && node.contains("synthetic"))
    throw ConfigError("config: service needs exactly one of 'csv' or 'synthetic'");
  return s;
}

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
  std::ifstream in(path);
  json doc;
  try {
    doc = json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  ScenarioConfig cfg;
  cfg.config_dir = std::filesystem::path(path).parent_path().string();
  try {
    if (!doc.contains("circuit")) throw ConfigError("config: 'circuit' section missing");
    cfg.circuit = parse_circuit(doc["circuit"], cfg.config_dir);
    if (!doc.contains("bess")) throw ConfigError("config: 'bess' section missing");
    cfg.bess = parse_bess(doc["bess"]);

    if (doc.contains("scheduler")) {
      const json& s = doc["scheduler"];
      cfg.mode = scheduler_mode_from_string(s.value("mode", "dpc"));
      cfg.horizon = static_cast<int>(number_or(s, "horizon", 16));
      cfg.soft_constraints = s.value("soft_constraints", true);
      cfg.slack_penalty = number_or(s, "slack_penalty", 1e6);
    }
    if (doc.contains("envelope")) {
      const json& e = doc["envelope"];
      cfg.envelope.k_upper = static_cast<int>(number_or(e, "k_upper", 2));
      cfg.envelope.j_lower = static_cast<int>(number_or(e, "j_lower", 2));
      cfg.envelope.include_voltage = e.value("include_voltage", true);
      cfg.envelope.sample_count = static_cast<int>(number_or(e, "sample_count", 101));
      if (e.contains("soc_domain")) {
        cfg.envelope.soc_lo = e["soc_domain"][0].get<double>();
        cfg.envelope.soc_hi = e["soc_domain"][1].get<double>();
      }
      cfg.envelope.fit_error_cap_kw = number_or(e, "fit_error_cap_kw", 1.0);
    }
    if (doc.contains("forecast")) {
      const json& f = doc["forecast"];
      if (f.contains("constants")) {
        cfg.forecast.use_constants = true;
        cfg.forecast.p_hi_kw = require_number(f["constants"], "p_hi_kw");
        cfg.forecast.p_lo_kw = require_number(f["constants"], "p_lo_kw");
        cfg.forecast.w_hi_kwh = require_number(f["constants"], "w_hi_kwh");
        cfg.forecast.w_lo_kwh = require_number(f["constants"], "w_lo_kwh");
      } else if (f.contains("file")) {
        cfg.forecast.file = f["file"].get<std::string>();
      } else {
        throw ConfigError("config: forecast needs 'constants' or 'file'");
      }
    }
    if (doc.contains("service")) cfg.service = parse_service(doc["service"]);
    if (doc.contains("sim")) {
      const json& s = doc["sim"];
      cfg.soc0 = number_or(s, "soc0", 0.5);
      cfg.period_s = number_or(s, "period_s", 90.0);
      cfg.oracle_r_multiplier = number_or(s, "oracle_r_multiplier", 1.0);
    }
    if (doc.contains("sweep")) {
      const json& s = doc["sweep"];
      SweepSpec sweep;
      for (const auto& v : s["soc0_list"]) sweep.soc0_list.push_back(v.get<double>());
      if (s.contains("modes"))
        for (const auto& m : s["modes"])
          sweep.modes.push_back(scheduler_mode_from_string(m.get<std::string>()));
      else
        sweep.modes = {SchedulerMode::Spc, SchedulerMode::Dpc, SchedulerMode::DpcNoVoltage};
      sweep.high_soc_threshold = number_or(s, "high_soc_threshold", 0.55);
      if (s.contains("service_high")) sweep.service_high = parse_service(s["service_high"]);
      if (s.contains("forecast_high")) {
        const json& fh = s["forecast_high"]["constants"];
        sweep.p_hi_kw_high = require_number(fh, "p_hi_kw");
        sweep.p_lo_kw_high = require_number(fh, "p_lo_kw");
        sweep.w_hi_kwh_high = require_number(fh, "w_hi_kwh");
        sweep.w_lo_kwh_high = require_number(fh, "w_lo_kwh");
      }
      cfg.sweep = std::move(sweep);
    }
    if (doc.contains("solver")) {
      const json& s = doc["solver"];
      cfg.solver.tol_abs = number_or(s, "tol_abs", 1e-6);
      cfg.solver.tol_rel = number_or(s, "tol_rel", 1e-6);
      cfg.solver.max_iter = static_cast<int>(number_or(s, "max_iter", 100000));
    }
    if (doc.contains("output")) cfg.out_dir = doc["output"].value("dir", "out");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ForecastSet resolve_forecasts(const ForecastSource& source, int horizon,
                              const std::string& base_dir) {
  if (source.use_constants)
    return constant_forecasts(horizon, source.p_hi_kw, source.p_lo_kw, source.w_hi_kwh,
                              source.w_lo_kwh);
  if (source.file) {
    const std::string path = resolve_path(base_dir, *source.file);
    if (!std::filesystem::exists(path)) throw ConfigError("forecast file not found: " + path);
    const auto table = csv::read(path);
    const std::vector<std::string> expected{"p_lo_kw", "p_hi_kw", "w_lo_kwh", "w_hi_kwh"};
    if (table.header != expected || table.rows.size() != 1)
      throw ConfigError(path + ": expected one row with header p_lo_kw,p_hi_kw,w_lo_kwh,w_hi_kwh");
    const auto& r = table.rows[0];
    return constant_forecasts(horizon, csv::to_double(r[1], path), csv::to_double(r[0], path),
                              csv::to_double(r[3], path), csv::to_double(r[2], path));
  }
  throw ConfigError("config: no forecast source given");
}

ServiceTrace resolve_service(const ServiceSource& source, const std::string& base_dir) {
  if (source.file) {
    const std::string path = resolve_path(base_dir, *source.file);
    if (!std::filesystem::exists(path)) throw ConfigError("service trace not found: " + path);
    return read_service_csv(path);
  }
  if (source.synthetic) return make_synthetic_service(*source.synthetic, source.seed);
  throw ConfigError("config: no service source given");
}

}  // namespace bessched::cli
