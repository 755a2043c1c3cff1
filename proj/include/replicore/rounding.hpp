#pragma once

#include "replicore/linalg.hpp"
#include "replicore/rng.hpp"
#include "replicore/tiling.hpp"

namespace replicore {

struct RoundingParams {
  double eps;
  double rho;
  double c_q = 10.0;  // constant in the wrap half-width

  RoundingParams(double eps_, double rho_, double c_q_ = 10.0)
      : eps(eps_), rho(rho_), c_q(c_q_) {
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("RoundingParams: rho in (0,1)");
    if (!(c_q >= 10.0))
      throw std::invalid_argument("RoundingParams: c_q >= 10");
  }

  double wrap_half_width(size_t n) const {
    const double nd = double(n);
    return c_q * (std::pow(nd, 1.5) + nd * eps / rho);
  }
};

// Randomized rounding through a tiling: rotate, shift, wrap, snap to the
// eps-scaled cell label, invert. The returned point never moves farther than
// eps from the input; with shared internal randomness, nearby inputs snap to
// the same point with probability 1 - O(rho).
Vec replicable_round(const Vec& u, const TilingOracle& tiling,
                     const RoundingParams& params, SharedRandomness& rand);

// Deterministic core with the rotation and offset supplied; the public
// entry point draws them from the shared stream. Exposed for tests that
// need to pin the transformation.
Vec replicable_round_with(const Vec& u, const TilingOracle& tiling,
                          const RoundingParams& params, const Mat& rotation,
                          const Vec& offset);

}  // namespace replicore
