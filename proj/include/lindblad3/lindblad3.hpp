// lindblad3.hpp: umbrella header

#pragma once

#include "lindblad3/config.hpp"
#include "lindblad3/core.hpp"
#include "lindblad3/errors.hpp"
#include "lindblad3/expm.hpp"
#include "lindblad3/observables.hpp"
#include "lindblad3/propagator.hpp"
#include "lindblad3/runner.hpp"
