#pragma once

#include "pvsc/hjb.hpp"
#include "pvsc/model.hpp"

namespace pvsc::presets {

// Seasonal and process parameters calibrated on January 2023 data: hourly
// Italian single national price (PUN) and Italian power demand, plus a
// 5-minute photovoltaic production series. The price level (intercept) and
// the incentive tariff are deployment choices, not calibration outputs; the
// defaults below use a 150 EUR/MWh price level and the 110 EUR/MWh
// self-consumption tariff.
ModelConfig it2023_single_battery();

// Same market model with two battery units in parallel: doubled charge and
// discharge power and doubled capacity.
ModelConfig it2023_two_battery();

// Production-run lattice: tau = 0.024 h, p in [-0.6, 0.6] with step 0.04,
// SoC step 0.005 MWh.
SolverGrid default_grid(const ModelConfig& config);

}  // namespace pvsc::presets
