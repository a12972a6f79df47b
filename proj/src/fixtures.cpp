#include "bessched/fixtures.hpp"

namespace bessched::fixtures {

CircuitParams reference_pack() {
  CircuitParams p;
  p.ocv = linear_ocv(620.0, 180.0);
  p.series_resistance_ohm = 0.05;
  p.v_min_volt = 580.0;
  p.v_max_volt = 840.0;
  p.i_max_amp = 1000.0;
  return p;
}

BessConfig reference_bess() {
  BessConfig c;
  c.energy_capacity_kwh = 500.0;
  c.rated_power_kw = 720.0;
  c.efficiency = 0.95;
  c.soc_min = 0.05;
  c.soc_max = 0.95;
  c.step_hours = 90.0 / 3600.0;
  return c;
}

CircuitParams motivating_pack() {
  CircuitParams p;
  p.ocv = linear_ocv(600.0, 180.0);
  p.series_resistance_ohm = 0.05;
  p.v_min_volt = 560.0;
  p.v_max_volt = 820.0;
  p.i_max_amp = 1000.0;
  return p;
}

BessConfig motivating_bess() {
  BessConfig c;
  c.energy_capacity_kwh = 560.0;
  c.rated_power_kw = 720.0;
  c.efficiency = 1.0;
  c.soc_min = 0.05;
  c.soc_max = 0.95;
  c.step_hours = 1.0 / 12.0;
  return c;
}

ForecastSet motivating_forecasts() {
  ForecastSet f;
  const int horizon = 6;
  f.p_hi_kw.assign(horizon, 0.0);
  f.p_lo_kw.assign(horizon, 0.0);
  f.w_hi_kwh.assign(horizon, 0.0);
  f.w_lo_kwh.assign(horizon, 0.0);
  // Point forecast: one 600 kW discharge interval (50 kWh at 5 min steps).
  f.p_hi_kw[2] = f.p_lo_kw[2] = 600.0;
  f.w_hi_kwh[2] = f.w_lo_kwh[2] = 50.0;
  return f;
}

CircuitParams sweep_pack() {
  CircuitParams p;
  p.ocv = linear_ocv(620.0, 180.0);
  p.series_resistance_ohm = 0.08;
  p.v_min_volt = 600.0;
  p.v_max_volt = 830.0;
  p.i_max_amp = 1300.0;
  return p;
}

BessConfig sweep_bess() {
  return reference_bess();
}

ForecastSet sweep_forecasts_low(int horizon) {
  return constant_forecasts(horizon, 600.0, -600.0, 4.1, -5.2);
}

ForecastSet sweep_forecasts_high(int horizon) {
  return constant_forecasts(horizon, 600.0, -600.0, 5.2, -4.1);
}

}  // namespace bessched::fixtures
