#pragma once

#include "minkdist/types.hpp"
#include "minkdist/gauge.hpp"
#include "minkdist/boundary.hpp"
#include "minkdist/distance.hpp"
#include "minkdist/curvature.hpp"
#include "minkdist/cutlocus.hpp"
#include "minkdist/quadrature.hpp"
#include "minkdist/integrate.hpp"
