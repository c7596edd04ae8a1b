#pragma once

// Umbrella header: pulls in the full library.

#include "hawkes/bench.hpp"
#include "hawkes/common.hpp"
#include "hawkes/events.hpp"
#include "hawkes/families.hpp"
#include "hawkes/gram.hpp"
#include "hawkes/io.hpp"
#include "hawkes/model.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/select.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/spectral.hpp"
#include "hawkes/step_function.hpp"
#include "hawkes/truth.hpp"
