#pragma once

// Umbrella header: decomposition of a symmetric covariance matrix into a
// positive semidefinite low-rank part plus a nonnegative diagonal.

#include "lrd/datagen.hpp"
#include "lrd/dense_matrix.hpp"
#include "lrd/errors.hpp"
#include "lrd/experiments.hpp"
#include "lrd/matrix_io.hpp"
#include "lrd/metrics.hpp"
#include "lrd/projections.hpp"
#include "lrd/rng.hpp"
#include "lrd/solver.hpp"
#include "lrd/spectral.hpp"
#include "lrd/sym_matrix.hpp"
