#pragma once

// Local-density workbench: exact oracles, fairness machinery and the
// distributed (LOCAL / CONGEST) approximation algorithms on a deterministic
// round simulator.

#include "ldl/congest.hpp"
#include "ldl/exact.hpp"
#include "ldl/flow.hpp"
#include "ldl/graph.hpp"
#include "ldl/json_io.hpp"
#include "ldl/local_algo.hpp"
#include "ldl/log.hpp"
#include "ldl/orientation.hpp"
#include "ldl/rational.hpp"
#include "ldl/report.hpp"
#include "ldl/sim.hpp"
