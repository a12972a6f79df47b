#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bessched {

/// Power and energy prediction intervals over the scheduling horizon.
struct ForecastSet {
  std::vector<double> p_hi_kw;
  std::vector<double> p_lo_kw;
  std::vector<double> w_hi_kwh;
  std::vector<double> w_lo_kwh;

  int horizon() const { return static_cast<int>(p_hi_kw.size()); }
};

ForecastSet constant_forecasts(int horizon, double p_hi_kw, double p_lo_kw, double w_hi_kwh,
                               double w_lo_kwh);

/// Checks ordering (lo <= hi elementwise) and that energy forecasts are not
/// more power-demanding than the power forecasts: |w|/dt <= max(|p_hi|,|p_lo|).
void validate(const ForecastSet& forecasts, double step_hours);

/// Linear-interpolation quantile on sorted order statistics: position (n-1)q.
double empirical_quantile(std::span<const double> data, double q);

/// Time-invariant power PIs: every horizon entry is the (q_lo, q_hi) quantile
/// pair of the raw 1 Hz series. Requires at least 100 samples.
std::pair<std::vector<double>, std::vector<double>> estimate_power_pis(
    std::span<const double> series_1s_kw, double q_lo, double q_hi, int horizon);

/// Energy PIs from non-overlapping block means of length resample_s, each
/// multiplied by resample_s/3600 h to yield kWh; a trailing partial block is
/// dropped. Requires at least one full block.
std::pair<std::vector<double>, std::vector<double>> estimate_energy_pis(
    std::span<const double> series_1s_kw, int resample_s, double q_lo, double q_hi, int horizon);

/// Convenience wrapper producing the full ForecastSet from one series.
ForecastSet estimate_forecasts(std::span<const double> series_1s_kw, int resample_s, double q_lo,
                               double q_hi, int horizon);

/// Reads a 1 Hz power series from a CSV with header `t_s,power_kw`.
/// Timestamps must advance by exactly 1 s; gaps are rejected.
std::vector<double> read_power_trace_csv(const std::string& path);

}  // namespace bessched
