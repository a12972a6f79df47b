#include "bessched/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bessched/csvio.hpp"

namespace bessched {

ForecastSet constant_forecasts(int horizon, double p_hi_kw, double p_lo_kw, double w_hi_kwh,
                               double w_lo_kwh) {
  ForecastSet f;
  f.p_hi_kw.assign(horizon, p_hi_kw);
  f.p_lo_kw.assign(horizon, p_lo_kw);
  f.w_hi_kwh.assign(horizon, w_hi_kwh);
  f.w_lo_kwh.assign(horizon, w_lo_kwh);
  return f;
}

void validate(const ForecastSet& f, double step_hours) {
  const size_t n = f.p_hi_kw.size();
  if (f.p_lo_kw.size() != n || f.w_hi_kwh.size() != n || f.w_lo_kwh.size() != n)
    throw std::invalid_argument("forecasts: sequence lengths differ");
  constexpr double kSlack = 1e-9;
  for (size_t t = 0; t < n; ++t) {
    if (f.p_lo_kw[t] > f.p_hi_kw[t] || f.w_lo_kwh[t] > f.w_hi_kwh[t])
      throw std::invalid_argument("forecasts: lower bound above upper at step " + std::to_string(t));
    const double p_mag = std::max(std::abs(f.p_hi_kw[t]), std::abs(f.p_lo_kw[t]));
    const double w_mag = std::max(std::abs(f.w_hi_kwh[t]), std::abs(f.w_lo_kwh[t])) / step_hours;
    if (w_mag > p_mag + kSlack)
      throw std::invalid_argument("forecasts: energy PI implies more power than the power PI at step " +
                                  std::to_string(t));
  }
}

double empirical_quantile(std::span<const double> data, double q) {
  if (data.empty()) throw std::invalid_argument("empirical_quantile: empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q outside [0,1]");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = (sorted.size() - 1) * q;
  const size_t lo = static_cast<size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(lo);
  return sorted[lo] + w * (sorted[lo + 1] - sorted[lo]);
}

std::pair<std::vector<double>, std::vector<double>> estimate_power_pis(
    std::span<const double> series_1s_kw, double q_lo, double q_hi, int horizon) {
  if (series_1s_kw.size() < 100)
    throw std::invalid_argument("estimate_power_pis: need at least 100 samples");
  const double lo = empirical_quantile(series_1s_kw, q_lo);
  const double hi = empirical_quantile(series_1s_kw, q_hi);
  return {std::vector<double>(horizon, lo), std::vector<double>(horizon, hi)};
}

std::pair<std::vector<double>, std::vector<double>> estimate_energy_pis(
    std::span<const double> series_1s_kw, int resample_s, double q_lo, double q_hi, int horizon) {
  if (resample_s < 1) throw std::invalid_argument("estimate_energy_pis: resample_s must be >= 1");
  if (series_1s_kw.size() < static_cast<size_t>(resample_s))
    throw std::invalid_argument("estimate_energy_pis: series shorter than one block");
  const size_t blocks = series_1s_kw.size() / resample_s;
  std::vector<double> energy_kwh(blocks);
  for (size_t b = 0; b < blocks; ++b) {
    double sum = 0.0;
    for (int i = 0; i < resample_s; ++i) sum += series_1s_kw[b * resample_s + i];
    energy_kwh[b] = sum / resample_s * (resample_s / 3600.0);
  }
  const double lo = empirical_quantile(energy_kwh, q_lo);
  const double hi = empirical_quantile(energy_kwh, q_hi);
  return {std::vector<double>(horizon, lo), std::vector<double>(horizon, hi)};
}

ForecastSet estimate_forecasts(std::span<const double> series_1s_kw, int resample_s, double q_lo,
                               double q_hi, int horizon) {
  ForecastSet f;
  auto [p_lo, p_hi] = estimate_power_pis(series_1s_kw, q_lo, q_hi, horizon);
  auto [w_lo, w_hi] = estimate_energy_pis(series_1s_kw, resample_s, q_lo, q_hi, horizon);
  f.p_lo_kw = std::move(p_lo);
  f.p_hi_kw = std::move(p_hi);
  f.w_lo_kwh = std::move(w_lo);
  f.w_hi_kwh = std::move(w_hi);
  return f;
}

std::vector<double> read_power_trace_csv(const std::string& path) {
  const auto table = csv::read(path);
  if (table.header != std::vector<std::string>{"t_s", "power_kw"})
    throw std::runtime_error(path + ": expected header 't_s,power_kw'");
  std::vector<double> series;
  series.reserve(table.rows.size());
  double expected_t = 0.0;
  bool first = true;
  for (const auto& row : table.rows) {
    const double t = csv::to_double(row[0], path + " t_s");
    if (first) {
      expected_t = t;
      first = false;
    }
    if (t != expected_t)
      throw std::runtime_error(path + ": trace not contiguous at 1 Hz near t=" + row[0]);
    expected_t += 1.0;
    series.push_back(csv::to_double(row[1], path + " power_kw"));
  }
  return series;
}

}  // namespace bessched
