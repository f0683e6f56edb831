#pragma once

#include <sconvex/core.hpp>
#include <sconvex/linalg.hpp>
#include <sconvex/geometry.hpp>
#include <sconvex/polynomial.hpp>
#include <sconvex/sublevel.hpp>
#include <sconvex/fixtures.hpp>
#include <sconvex/reach.hpp>
#include <sconvex/pendulum.hpp>
