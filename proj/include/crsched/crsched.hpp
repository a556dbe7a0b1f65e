#pragma once

// Everything: instances and simplifications, the optimum oracle, algorithm
// maps and their simulator, the map search, randomized maps, JSON forms.

#include "crsched/constants.hpp"
#include "crsched/json_io.hpp"
#include "crsched/randomized.hpp"
#include "crsched/report_io.hpp"
