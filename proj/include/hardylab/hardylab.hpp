#pragma once

#include "hardylab/error.hpp"
#include "hardylab/quadrature.hpp"
#include "hardylab/finite_difference.hpp"
#include "hardylab/wave.hpp"
#include "hardylab/exact_example.hpp"
#include "hardylab/gauge.hpp"
#include "hardylab/appell.hpp"
#include "hardylab/convexity.hpp"
#include "hardylab/propagator.hpp"
