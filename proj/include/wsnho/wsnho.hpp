#pragma once

#include "wsnho/dv_routing.hpp"
#include "wsnho/error.hpp"
#include "wsnho/handoff_protocol.hpp"
#include "wsnho/layer_stats.hpp"
#include "wsnho/packet_queues.hpp"
#include "wsnho/scenario.hpp"
#include "wsnho/sim_engine.hpp"
#include "wsnho/simulation.hpp"
#include "wsnho/world.hpp"
