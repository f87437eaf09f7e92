#pragma once

// Umbrella header for the library (summary.hpp is separate: it needs nlohmann/json).

#include "analysis.hpp"
#include "checks.hpp"
#include "config.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "gains.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "lti_tools.hpp"
#include "plants.hpp"
#include "protocols.hpp"
#include "scenario_config.hpp"
#include "scenarios.hpp"
#include "switching.hpp"
#include "tolerances.hpp"
