#pragma once

#include "cylproc/analytic.hpp"
#include "cylproc/estimate.hpp"
#include "cylproc/euclid.hpp"
#include "cylproc/model.hpp"
#include "cylproc/optimize.hpp"
#include "cylproc/rng.hpp"
#include "cylproc/sim.hpp"
