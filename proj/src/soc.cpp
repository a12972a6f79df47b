#include "bessched/soc.hpp"

#include <stdexcept>
#include <string>

namespace bessched {

void validate(const BessConfig& config) {
  if (!(config.energy_capacity_kwh > 0.0))
    throw std::invalid_argument("bess: energy capacity must be > 0");
  if (!(config.rated_power_kw > 0.0)) throw std::invalid_argument("bess: rated power must be > 0");
  if (!(config.efficiency > 0.0 && config.efficiency <= 1.0))
    throw std::invalid_argument("bess: efficiency must be in (0,1]");
  if (!(config.soc_min >= 0.0 && config.soc_min < config.soc_max && config.soc_max <= 1.0))
    throw std::invalid_argument("bess: need 0 <= soc_min < soc_max <= 1");
  if (!(config.step_hours > 0.0)) throw std::invalid_argument("bess: step duration must be > 0");
}

double h_step(double power_kw, const BessConfig& config) {
  const double scaled = power_kw > 0.0 ? power_kw / config.efficiency : power_kw * config.efficiency;
  return config.step_hours / config.energy_capacity_kwh * scaled;
}

std::vector<double> soc_trajectory(double soc0, std::span<const double> powers_kw,
                                   const BessConfig& config) {
  std::vector<double> soc;
  soc.reserve(powers_kw.size() + 1);
  soc.push_back(soc0);
  double s = soc0;
  for (double p : powers_kw) {
    s -= h_step(p, config);
    soc.push_back(s);
  }
  return soc;
}

SocTrajectory soc_pi_trajectories(double soc0, std::span<const double> energy_lo_kwh,
                                  std::span<const double> energy_hi_kwh,
                                  std::span<const double> offsets_kw, const BessConfig& config) {
  if (energy_lo_kwh.size() != energy_hi_kwh.size() || energy_lo_kwh.size() != offsets_kw.size())
    throw std::invalid_argument("soc_pi_trajectories: sequence lengths differ");

  std::vector<double> p_from_hi(energy_hi_kwh.size());
  std::vector<double> p_from_lo(energy_lo_kwh.size());
  for (size_t t = 0; t < offsets_kw.size(); ++t) {
    p_from_hi[t] = energy_hi_kwh[t] / config.step_hours + offsets_kw[t];
    p_from_lo[t] = energy_lo_kwh[t] / config.step_hours + offsets_kw[t];
  }
  SocTrajectory traj;
  traj.soc_lo = soc_trajectory(soc0, p_from_hi, config);
  traj.soc_hi = soc_trajectory(soc0, p_from_lo, config);
  return traj;
}

}  // namespace bessched
