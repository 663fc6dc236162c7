#pragma once

#include "opdyn/agents.hpp"
#include "opdyn/analysis.hpp"
#include "opdyn/core.hpp"
#include "opdyn/fourier_ode.hpp"
#include "opdyn/grid.hpp"
#include "opdyn/spectral.hpp"
#include "opdyn/stationary.hpp"
