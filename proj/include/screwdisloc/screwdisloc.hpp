#pragma once

// Umbrella header.

#include "screwdisloc/errors.hpp"
#include "screwdisloc/linalg.hpp"
#include "screwdisloc/parallel.hpp"
#include "screwdisloc/lattice.hpp"
#include "screwdisloc/operators.hpp"
#include "screwdisloc/kalgebra.hpp"
#include "screwdisloc/models.hpp"
#include "screwdisloc/invariants.hpp"
#include "screwdisloc/dislocation.hpp"
#include "screwdisloc/coarselift.hpp"
