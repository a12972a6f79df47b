#pragma once

#include "bessched/circuit.hpp"
#include "bessched/forecast.hpp"
#include "bessched/soc.hpp"

namespace bessched::fixtures {

/// Synthetic pack used throughout the unit tests and the documentation:
/// v_oc = 620 + 180 soc, R = 0.05 ohm, 580-840 V window, 1000 A rated.
/// Current limits bind mid-SOC, voltage limits at the extremes.
CircuitParams reference_pack();
BessConfig reference_bess();  // 500 kWh / 720 kW / eta 0.95 / 90 s steps

/// Pack scaled so the SOC-dependent discharge bound at SOC 20% sits below
/// 600 kW, for the preemptive-charging demonstration.
CircuitParams motivating_pack();
BessConfig motivating_bess();        // 560 kWh / 720 kW / eta 1 / 5 min steps
ForecastSet motivating_forecasts();  // single 600 kW step at t=2, horizon 6

/// Pack with a narrow voltage window relative to its rated current, so the
/// voltage limits dominate the feasible power over a wide SOC range. Used by
/// the closed-loop comparison fixtures.
CircuitParams sweep_pack();
BessConfig sweep_bess();
ForecastSet sweep_forecasts_low(int horizon);   // +-600 kW, +4.1/-5.2 kWh
ForecastSet sweep_forecasts_high(int horizon);  // +-600 kW, +5.2/-4.1 kWh

}  // namespace bessched::fixtures
