#pragma once

#include "plcsim/capacity.hpp"
#include "plcsim/channel.hpp"
#include "plcsim/errors.hpp"
#include "plcsim/harness.hpp"
#include "plcsim/mna.hpp"
#include "plcsim/rng.hpp"
#include "plcsim/scheduler.hpp"
#include "plcsim/topology.hpp"
#include "plcsim/traffic.hpp"
