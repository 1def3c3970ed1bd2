#pragma once

#include "cartamr/errors.hpp"
#include "cartamr/numeric.hpp"
#include "cartamr/mesh.hpp"
#include "cartamr/materials.hpp"
#include "cartamr/geometry.hpp"
#include "cartamr/quadrature.hpp"
#include "cartamr/fem.hpp"
#include "cartamr/tridiag.hpp"
#include "cartamr/solver.hpp"
#include "cartamr/reconstruct.hpp"
#include "cartamr/estimator.hpp"
#include "cartamr/amr.hpp"
#include "cartamr/io.hpp"
