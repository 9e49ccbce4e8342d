#pragma once

#include "covert/config.hpp"
#include "covert/covertness_metrics.hpp"
#include "covert/detector.hpp"
#include "covert/error.hpp"
#include "covert/montecarlo.hpp"
#include "covert/noise_models.hpp"
#include "covert/rng.hpp"
#include "covert/sweep.hpp"
#include "covert/thresholds_rates.hpp"
#include "covert/units_special.hpp"
#include "covert/version.hpp"
