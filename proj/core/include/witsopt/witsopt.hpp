#pragma once

#include "witsopt/costs.hpp"
#include "witsopt/errors.hpp"
#include "witsopt/gausscore.hpp"
#include "witsopt/optimizer.hpp"
#include "witsopt/parallel.hpp"
#include "witsopt/simulator.hpp"
