#pragma once

#include <functional>

#include "replicore/linalg.hpp"
#include "replicore/rng.hpp"

namespace replicore {

// Coordinate-wise wrap-around shift onto [-Q, Q): ((x + Q) mod 2Q) - Q with
// the nonnegative modulus.
Vec wrap(const Vec& x, double q);
double wrap_scalar(double x, double q);

// Labeled membership map from R^N to cell labels, with declared parameters.
// gamma is the uncovered fraction, surface_area the normalized boundary
// area per unit volume, cell_radius the label-to-point distance bound.
struct TilingOracle {
  size_t dim = 0;
  std::function<Vec(const Vec&)> membership;
  double gamma = 0.0;
  double surface_area = 0.0;
  double cell_radius = 0.1;
};

// Axis-aligned cubes of side s, labels at cell centers. Cell radius is the
// half-diagonal s*sqrt(N)/2, which must stay within 0.1.
TilingOracle cube_tiling(size_t n, double side);

// Majority vote over 2*ceil(log2(1/delta)) + 1 queries, for user-supplied
// membership oracles that are only correct with probability 2/3.
TilingOracle boost_membership(const TilingOracle& noisy, double delta);

}  // namespace replicore
