#pragma once

#include "bodepace/commands.hpp"
#include "bodepace/compensators.hpp"
#include "bodepace/config.hpp"
#include "bodepace/discretization.hpp"
#include "bodepace/errors.hpp"
#include "bodepace/frequency_response.hpp"
#include "bodepace/grid_search.hpp"
#include "bodepace/io.hpp"
#include "bodepace/metrics.hpp"
#include "bodepace/pi_controller.hpp"
#include "bodepace/plant.hpp"
#include "bodepace/polynomial.hpp"
#include "bodepace/sensing_filters.hpp"
#include "bodepace/simulator.hpp"
#include "bodepace/stability.hpp"
#include "bodepace/traffic.hpp"
#include "bodepace/transfer_function.hpp"
