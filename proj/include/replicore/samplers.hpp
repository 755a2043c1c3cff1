#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "replicore/rng.hpp"

namespace replicore {

// Exact Binomial(n, p) draw. Geometric skipping for small n*p, BTRS
// (Hormann's transformed rejection with an exact lgamma acceptance test)
// otherwise, so a draw is O(1) regardless of n. Every batch estimate in the
// library runs through this sampler: a batch of n coin flips is summarized
// by its head count, which has exactly this law.
inline uint64_t binomial_draw(SharedRandomness& rng, uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const bool flipped = p > 0.5;
  const double ps = flipped ? 1.0 - p : p;
  const double nd = double(n);
  uint64_t k = 0;
  if (nd * ps < 10.0) {
    // Count successes by skipping geometric gaps between them.
    const double lq = std::log1p(-ps);
    double i = -1.0;
    for (;;) {
      i += std::floor(std::log(rng.uniform01_open()) / lq) + 1.0;
      if (i >= nd) break;
      ++k;
    }
  } else {
    const double q = 1.0 - ps;
    const double spq = std::sqrt(nd * ps * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * ps;
    const double c = nd * ps + 0.5;
    const double vr = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(ps / q);
    const double m = std::floor((nd + 1.0) * ps);
    const double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
    for (;;) {
      const double u = rng.uniform01() - 0.5;
      const double v = rng.uniform01_open();
      const double us = 0.5 - std::fabs(u);
      const double kd = std::floor((2.0 * a / us + b) * u + c);
      if (kd < 0.0 || kd > nd) continue;
      if (us >= 0.07 && v <= vr) {
        k = uint64_t(kd);
        break;
      }
      const double lv = std::log(v * alpha / (a / (us * us) + b));
      if (lv <= h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                    (kd - m) * lpq) {
        k = uint64_t(kd);
        break;
      }
    }
  }
  return flipped ? n - k : k;
}

// Exact Multinomial(n, probs) counts via sequential conditional binomials.
// probs must be nonnegative; any residual mass falls into an implicit
// overflow cell whose count is n minus the returned total.
inline std::vector<uint64_t> multinomial_draw(SharedRandomness& rng, uint64_t n,
                                              const std::vector<double>& probs) {
  std::vector<uint64_t> counts(probs.size(), 0);
  double rest = 1.0;
  uint64_t remaining = n;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (remaining == 0 || rest <= 0.0) break;
    const double pi = probs[i];
    if (pi <= 0.0) continue;
    const double cond = pi / rest;
    if (cond >= 1.0 - 1e-15) {
      counts[i] = remaining;
      remaining = 0;
    } else {
      counts[i] = binomial_draw(rng, remaining, cond);
      remaining -= counts[i];
    }
    rest -= pi;
  }
  return counts;
}

}  // namespace replicore
