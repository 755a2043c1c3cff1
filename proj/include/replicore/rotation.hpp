#pragma once

#include "replicore/linalg.hpp"
#include "replicore/rng.hpp"

namespace replicore {

// Haar-distributed rotation from SO(N): Gaussian matrix, Gram-Schmidt with
// positive triangular diagonal (Haar on O(N)), then one column flip to land
// in the determinant +1 component.
Mat draw_rotation(SharedRandomness& rand, int n);

}  // namespace replicore
