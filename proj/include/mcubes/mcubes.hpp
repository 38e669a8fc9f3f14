// SPDX-License-Identifier: Apache-2.0
#pragma once

// Umbrella header for the whole library.

#include "mcubes/accumulators.hpp"
#include "mcubes/driver.hpp"
#include "mcubes/exact_sum.hpp"
#include "mcubes/grid.hpp"
#include "mcubes/integrands.hpp"
#include "mcubes/oracle.hpp"
#include "mcubes/rng.hpp"
#include "mcubes/sampler.hpp"
