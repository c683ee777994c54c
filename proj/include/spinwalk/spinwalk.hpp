#pragma once

#include "spinwalk/bath.hpp"
#include "spinwalk/classical.hpp"
#include "spinwalk/errors.hpp"
#include "spinwalk/io.hpp"
#include "spinwalk/linalg.hpp"
#include "spinwalk/propagation.hpp"
#include "spinwalk/rng.hpp"
#include "spinwalk/state.hpp"
#include "spinwalk/statistics.hpp"
#include "spinwalk/trajectory.hpp"
