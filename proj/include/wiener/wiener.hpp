#pragma once

#include "wiener/errors.hpp"
#include "wiener/numerics.hpp"
#include "wiener/random.hpp"
#include "wiener/dynamics.hpp"
#include "wiener/observables.hpp"
#include "wiener/filter.hpp"
#include "wiener/diagnostics.hpp"
#include "wiener/oracle.hpp"
