#pragma once

#include <span>
#include <vector>

namespace bessched {

struct BessConfig {
  double energy_capacity_kwh = 0.0;  // E^r
  double rated_power_kw = 0.0;       // B^r
  double efficiency = 0.95;          // eta, applied 1/eta discharging and eta charging
  double soc_min = 0.05;
  double soc_max = 0.95;
  double step_hours = 0.025;         // scheduler interval length
};

void validate(const BessConfig& config);

/// SOC decrement contributed by one interval at the given power
/// (discharge-positive): (dt/E) * (p/eta if p > 0, eta*p if p < 0).
double h_step(double power_kw, const BessConfig& config);

/// Cumulative SOC trajectory. Returns len(powers)+1 values starting at soc0.
/// Values are not clamped; bound enforcement is the caller's concern.
std::vector<double> soc_trajectory(double soc0, std::span<const double> powers_kw,
                                   const BessConfig& config);

/// SOC prediction-interval trajectories, one per energy-forecast bound.
struct SocTrajectory {
  std::vector<double> soc_lo;  // driven by the high energy forecast
  std::vector<double> soc_hi;  // driven by the low energy forecast
};

/// Energy forecasts are kWh per step; they are converted to average power
/// over step_hours, offset by `offsets_kw`, and integrated through h.
SocTrajectory soc_pi_trajectories(double soc0, std::span<const double> energy_lo_kwh,
                                  std::span<const double> energy_hi_kwh,
                                  std::span<const double> offsets_kw, const BessConfig& config);

}  // namespace bessched
