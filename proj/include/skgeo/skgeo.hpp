#pragma once

// Umbrella header: special (pseudo-)Kahler metrics from holomorphic
// prepotentials, the associated hyperkahler structure on M x R^{2n},
// and residual verification of the defining identities.

#include "skgeo/chart.hpp"
#include "skgeo/common.hpp"
#include "skgeo/expression.hpp"
#include "skgeo/hyperkahler.hpp"
#include "skgeo/jet.hpp"
#include "skgeo/special_kahler.hpp"
#include "skgeo/symplectic.hpp"
#include "skgeo/verify.hpp"
