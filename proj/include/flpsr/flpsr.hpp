// Umbrella header.
#pragma once

#include "flpsr/distribution.hpp"
#include "flpsr/optimizer.hpp"
#include "flpsr/quadrature.hpp"
#include "flpsr/radius.hpp"
#include "flpsr/rng.hpp"
#include "flpsr/simulator.hpp"
#include "flpsr/welfare.hpp"
