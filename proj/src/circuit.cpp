#include "bessched/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bessched/csvio.hpp"

namespace bessched {

namespace {

constexpr double kWattsPerKw = 1000.0;

void check_soc_domain(double soc) {
  if (!(soc >= 0.0 && soc <= 1.0))
    throw std::domain_error("soc outside [0,1]: " + std::to_string(soc));
}

}  // namespace

OcvCurve fit_ocv(std::vector<OcvSample> samples, double fit_soc_lo, double fit_soc_hi) {
  if (samples.size() < 2) throw std::invalid_argument("fit_ocv: need at least 2 samples");
  for (size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].soc > samples[i - 1].soc))
      throw std::invalid_argument("fit_ocv: samples must be strictly increasing in soc");

  OcvCurve curve;
  curve.fit_soc_lo = fit_soc_lo;
  curve.fit_soc_hi = fit_soc_hi;

  for (size_t i = 1; i < samples.size(); ++i)
    if (samples[i].voltage_v < samples[i - 1].voltage_v) curve.monotone_warning = true;

  // Plain least squares on the in-range samples.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  size_t n = 0;
  for (const auto& s : samples) {
    if (s.soc < fit_soc_lo || s.soc > fit_soc_hi) continue;
    sx += s.soc;
    sy += s.voltage_v;
    sxx += s.soc * s.soc;
    sxy += s.soc * s.voltage_v;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_ocv: fewer than 2 samples inside fit range");

  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw std::invalid_argument("fit_ocv: degenerate sample abscissae");
  curve.fit_slope_v = (n * sxy - sx * sy) / denom;
  curve.fit_intercept_v = (sy - curve.fit_slope_v * sx) / n;
  if (!(curve.fit_slope_v > 0.0)) curve.slope_warning = true;

  for (const auto& s : samples) {
    if (s.soc < fit_soc_lo || s.soc > fit_soc_hi) continue;
    const double r = std::abs(s.voltage_v - (curve.fit_intercept_v + curve.fit_slope_v * s.soc));
    curve.max_fit_residual_v = std::max(curve.max_fit_residual_v, r);
  }

  curve.samples = std::move(samples);
  return curve;
}

OcvCurve linear_ocv(double intercept_v, double slope_v) {
  return fit_ocv({{0.0, intercept_v}, {1.0, intercept_v + slope_v}}, 0.0, 1.0);
}

double ocv_at(const OcvCurve& curve, double soc) {
  check_soc_domain(soc);
  return curve.fit_intercept_v + curve.fit_slope_v * soc;
}

bool ocv_extrapolated(const OcvCurve& curve, double soc) {
  return soc < curve.fit_soc_lo || soc > curve.fit_soc_hi;
}

double ocv_table_at(const OcvCurve& curve, double soc) {
  const auto& s = curve.samples;
  if (s.size() < 2) throw std::runtime_error("ocv_table_at: no sample table");
  size_t hi = 1;
  while (hi + 1 < s.size() && s[hi].soc < soc) ++hi;
  const auto& a = s[hi - 1];
  const auto& b = s[hi];
  const double w = (soc - a.soc) / (b.soc - a.soc);
  return a.voltage_v + w * (b.voltage_v - a.voltage_v);
}

void validate(const CircuitParams& params) {
  if (!(params.series_resistance_ohm > 0.0))
    throw std::invalid_argument("circuit: series resistance must be > 0");
  if (!(params.v_min_volt > 0.0 && params.v_min_volt < params.v_max_volt))
    throw std::invalid_argument("circuit: need 0 < v_min < v_max");
  if (!(params.i_max_amp > 0.0)) throw std::invalid_argument("circuit: rated current must be > 0");
  if (params.ocv.samples.size() < 2) throw std::invalid_argument("circuit: OCV curve missing");
}

MptReport check_mpt_assumption(const CircuitParams& params) {
  const double r = params.series_resistance_ohm;
  // v_oc is affine in soc, so the minimum of v_oc/(2R) over the fit range
  // sits at one of the two endpoints.
  const double lo = params.ocv.fit_soc_lo;
  const double hi = params.ocv.fit_soc_hi;
  const double at_lo = ocv_at(params.ocv, std::clamp(lo, 0.0, 1.0)) / (2.0 * r);
  const double at_hi = ocv_at(params.ocv, std::clamp(hi, 0.0, 1.0)) / (2.0 * r);
  MptReport rep;
  rep.worst_i_max_amp = std::min(at_lo, at_hi);
  rep.worst_soc = at_lo <= at_hi ? lo : hi;
  rep.margin_amp = rep.worst_i_max_amp - params.i_max_amp;
  rep.holds = params.i_max_amp < rep.worst_i_max_amp;
  return rep;
}

PowerBounds power_bounds_voltage(const CircuitParams& params, double soc) {
  const double voc = ocv_at(params.ocv, soc);
  const double r = params.series_resistance_ohm;
  PowerBounds b;
  b.p_hi_kw = params.v_min_volt / r * (voc - params.v_min_volt) / kWattsPerKw;
  b.p_lo_kw = params.v_max_volt / r * (voc - params.v_max_volt) / kWattsPerKw;
  return b;
}

PowerBounds power_bounds_current(const CircuitParams& params, double soc) {
  const double voc = ocv_at(params.ocv, soc);
  const double r = params.series_resistance_ohm;
  const double i = params.i_max_amp;
  PowerBounds b;
  b.p_hi_kw = (voc * i - r * i * i) / kWattsPerKw;
  b.p_lo_kw = (-voc * i - r * i * i) / kWattsPerKw;
  return b;
}

PowerBounds feasible_power(const CircuitParams& params, double soc) {
  const PowerBounds v = power_bounds_voltage(params, soc);
  const PowerBounds c = power_bounds_current(params, soc);
  PowerBounds b;
  b.p_hi_kw = std::min(v.p_hi_kw, c.p_hi_kw);
  b.p_lo_kw = std::max(v.p_lo_kw, c.p_lo_kw);
  if (b.p_lo_kw > b.p_hi_kw)
    throw std::runtime_error("feasible_power: empty power interval at soc " + std::to_string(soc));
  return b;
}

double current_from_power(const CircuitParams& params, double soc, double power_kw) {
  const double voc = ocv_at(params.ocv, soc);
  const double r = params.series_resistance_ohm;
  const double p_w = power_kw * kWattsPerKw;
  const double disc = voc * voc - 4.0 * r * p_w;
  if (disc < 0.0)
    throw std::runtime_error("current_from_power: power beyond max power transfer: " +
                             std::to_string(power_kw) + " kW");
  // Smaller root: the branch below i_max where p grows with i.
  return (voc - std::sqrt(disc)) / (2.0 * r);
}

double terminal_voltage(const CircuitParams& params, double soc, double current_amp) {
  return ocv_at(params.ocv, soc) - params.series_resistance_ohm * current_amp;
}

std::vector<OcvSample> read_ocv_csv(const std::string& path) {
  const auto table = csv::read(path);
  if (table.header != std::vector<std::string>{"soc", "voltage_v"})
    throw std::runtime_error(path + ": expected header 'soc,voltage_v'");
  std::vector<OcvSample> samples;
  samples.reserve(table.rows.size());
  for (const auto& row : table.rows)
    samples.push_back({csv::to_double(row[0], path + " soc"), csv::to_double(row[1], path + " voltage_v")});
  return samples;
}

}  // namespace bessched
