#pragma once

#include <cstdint>

#include "replicore/linalg.hpp"
#include "replicore/rng.hpp"
#include "replicore/rounding.hpp"
#include "replicore/sources.hpp"
#include "replicore/tiling.hpp"

namespace replicore {

struct MeanEstParams {
  size_t n;
  double accuracy;  // eps for the l2 estimator, gamma for the l-infinity one
  double rho;
  double delta;
  const TilingOracle* tiling = nullptr;
  double c_budget = 3.0;
  double c_q = 10.0;

  MeanEstParams(size_t n_, double accuracy_, double rho_, double delta_,
                const TilingOracle* tiling_)
      : n(n_), accuracy(accuracy_), rho(rho_), delta(delta_), tiling(tiling_) {
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("MeanEstParams: rho in (0,1)");
    if (!(delta > 0.0 && delta < rho))
      throw std::invalid_argument("MeanEstParams: delta in (0, rho)");
    if (!(accuracy > 0.0))
      throw std::invalid_argument("MeanEstParams: accuracy > 0");
    if (tiling == nullptr || tiling->dim != n)
      throw std::invalid_argument("MeanEstParams: tiling dimension mismatch");
  }
};

// Coordinate-wise lower median of ceil(log2(N/delta)) batch means.
Vec median_of_means(VectorSource& source, uint64_t m, double delta);

// Median-of-means followed by per-coordinate rounding to integer multiples
// of K at a shared random threshold inside each cell. Output within K of the
// mean in l-infinity with probability 1 - delta; paired runs agree with
// probability 1 - O(rho).
Vec coarse_round(VectorSource& source, double k_width, double rho, double delta,
                 SharedRandomness& rand, double c_budget = 3.0);

uint64_t coarse_round_samples(size_t n, double k_width, double rho, double delta,
                              double c_budget = 3.0);

// Geometric median of ceil(8 ln(1/delta)) batch means, Weiszfeld iteration
// to fixed-point tolerance 1e-10. Meets the sub-Gaussian-style l2 accuracy
// contract for bounded-covariance sources.
Vec l2_core_estimate(VectorSource& source, uint64_t m, double delta);

struct MeanEstResult {
  Vec estimate;
  Vec coarse_center;
  Vec rounded_offset;  // estimate = coarse_center + rounded_offset exactly
  uint64_t vector_samples = 0;
};

uint64_t mean_l2_core_budget(const MeanEstParams& params);
uint64_t mean_linf_core_budget(const MeanEstParams& params);

// Coarse localization, recentering, core estimate, replicable rounding.
MeanEstResult replicable_mean_l2(VectorSource& source, const MeanEstParams& params,
                                 SharedRandomness& rand);

// Same pipeline with the median-of-means core and rounding accuracy
// sqrt(N) * gamma / ln(N/delta).
MeanEstResult replicable_mean_linf(VectorSource& source, const MeanEstParams& params,
                                   SharedRandomness& rand);

}  // namespace replicore
