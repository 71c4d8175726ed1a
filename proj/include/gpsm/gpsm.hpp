#pragma once

// Umbrella header: numerical function theory for generalized partial-slice
// monogenic functions over R_{p+q} -- Clifford arithmetic, slice geometry,
// the vartheta-bar operator, Cauchy kernels, quadrature, and the
// Cauchy/Plemelj/Teodorescu integral operators, plus the verification
// experiment suites.

#include "gpsm/signature.hpp"
#include "gpsm/multivector.hpp"
#include "gpsm/slice.hpp"
#include "gpsm/operators.hpp"
#include "gpsm/kernels.hpp"
#include "gpsm/quadrature.hpp"
#include "gpsm/functions.hpp"
#include "gpsm/transforms.hpp"
#include "gpsm/parallel.hpp"
#include "gpsm/report.hpp"
#include "gpsm/experiments.hpp"
