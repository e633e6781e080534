#pragma once

#include "starhomog/errors.hpp"
#include "starhomog/stargraph.hpp"
#include "starhomog/grid.hpp"
#include "starhomog/quadrature.hpp"
#include "starhomog/forcing.hpp"
#include "starhomog/femsolve.hpp"
#include "starhomog/upscale.hpp"
#include "starhomog/analysis.hpp"
#include "starhomog/experiment.hpp"
