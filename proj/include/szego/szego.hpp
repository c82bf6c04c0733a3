#pragma once

// Umbrella header.

#include "szego/diagnostics.hpp"
#include "szego/errors.hpp"
#include "szego/experiment.hpp"
#include "szego/measure.hpp"
#include "szego/multiindex.hpp"
#include "szego/operator.hpp"
#include "szego/rational.hpp"
#include "szego/spectral.hpp"
#include "szego/sphere_sampler.hpp"
#include "szego/symbol.hpp"
#include "szego/symbol_io.hpp"
#include "szego/version.hpp"
