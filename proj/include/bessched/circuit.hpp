#pragma once

#include <string>
#include <vector>

namespace bessched {

struct OcvSample {
  double soc;        // fraction in [0, 1]
  double voltage_v;
};

/// Open-circuit voltage vs. state of charge. Carries both the raw sample
/// table (used by the plant oracle) and a linear fit over a central SOC
/// range (the scheduler-facing model).
struct OcvCurve {
  std::vector<OcvSample> samples;  // strictly increasing in soc
  double fit_intercept_v = 0.0;
  double fit_slope_v = 0.0;  // volts per unit SOC
  double fit_soc_lo = 0.0;
  double fit_soc_hi = 1.0;
  double max_fit_residual_v = 0.0;  // over in-range samples
  bool monotone_warning = false;    // voltages decrease somewhere
  bool slope_warning = false;       // fitted slope is not > 0
};

/// Least-squares line over the samples falling inside [fit_soc_lo, fit_soc_hi].
/// Throws std::invalid_argument when fewer than two samples are in range or
/// the samples are not strictly increasing in soc.
OcvCurve fit_ocv(std::vector<OcvSample> samples, double fit_soc_lo, double fit_soc_hi);

/// Exact linear curve built from a two-point table; fit range [0, 1].
OcvCurve linear_ocv(double intercept_v, double slope_v);

/// Linear-fit OCV. soc outside [0, 1] throws std::domain_error. Outside the
/// fit range the line is extrapolated; query `ocv_extrapolated` to flag it.
double ocv_at(const OcvCurve& curve, double soc);
bool ocv_extrapolated(const OcvCurve& curve, double soc);

/// Piecewise-linear interpolation of the sample table (plant oracle path).
/// End segments extend beyond the first/last sample.
double ocv_table_at(const OcvCurve& curve, double soc);

struct CircuitParams {
  OcvCurve ocv;
  double series_resistance_ohm = 0.0;  // R, battery + converter Thevenin
  double v_min_volt = 0.0;
  double v_max_volt = 0.0;
  double i_max_amp = 0.0;  // rated current, discharge-positive
};

/// Throws std::invalid_argument unless 0 < v_min < v_max, R > 0, i_max > 0.
void validate(const CircuitParams& params);

/// Power interval in kW, discharge-positive: p_lo <= 0 <= p_hi on the valid
/// OCV range.
struct PowerBounds {
  double p_lo_kw = 0.0;
  double p_hi_kw = 0.0;
};

struct MptReport {
  bool holds = false;        // rated current below max-power-transfer current everywhere
  double worst_i_max_amp = 0.0;  // min over fit range of v_oc/(2R)
  double worst_soc = 0.0;
  double margin_amp = 0.0;   // worst_i_max - rated current
};

/// Checks the operative assumption that power grows monotonically with
/// current up to the rated current: i_rated < v_oc(soc)/(2R) over the fit range.
MptReport check_mpt_assumption(const CircuitParams& params);

/// Power bounds from the voltage limits alone:
///   p_hi = (v_min/R) (v_oc - v_min),  p_lo = (v_max/R) (v_oc - v_max).
/// p_hi can come out negative when v_oc < v_min; it is returned as-is.
PowerBounds power_bounds_voltage(const CircuitParams& params, double soc);

/// Power bounds from the current limit alone:
///   p_hi = v_oc i_max - R i_max^2,  p_lo = -v_oc i_max - R i_max^2.
PowerBounds power_bounds_current(const CircuitParams& params, double soc);

/// Intersection of the voltage- and current-derived bounds. Throws
/// std::runtime_error when the interval is empty (OCV outside the valid range).
PowerBounds feasible_power(const CircuitParams& params, double soc);

/// Inverts p = v_oc i - R i^2 on the branch below the max-power-transfer
/// current. Throws std::runtime_error when p exceeds v_oc^2/(4R).
double current_from_power(const CircuitParams& params, double soc, double power_kw);

/// Terminal voltage v = v_oc(soc) - R i.
double terminal_voltage(const CircuitParams& params, double soc, double current_amp);

/// Reads OCV samples from a CSV with header `soc,voltage_v`, soc as fraction.
std::vector<OcvSample> read_ocv_csv(const std::string& path);

}  // namespace bessched
