#pragma once

// Umbrella header for the hyperbolic-growth analysis toolkit.

#include "hypergrowth/comparative.hpp"
#include "hypergrowth/data_io.hpp"
#include "hypergrowth/diagnostics.hpp"
#include "hypergrowth/distortion.hpp"
#include "hypergrowth/errors.hpp"
#include "hypergrowth/fitting.hpp"
#include "hypergrowth/models.hpp"
#include "hypergrowth/series.hpp"
