#include "replicore/rounding.hpp"

#include <cmath>
#include <stdexcept>

#include "replicore/rotation.hpp"

namespace replicore {

Vec replicable_round_with(const Vec& u, const TilingOracle& tiling,
                          const RoundingParams& params, const Mat& rotation,
                          const Vec& offset) {
  const size_t n = u.size();
  const double q = params.wrap_half_width(n);
  const double eps = params.eps;

  Vec v = matvec(rotation, u);
  for (size_t i = 0; i < n; ++i) v[i] += offset[i];
  v = wrap(v, q);

  Vec scaled(n);
  for (size_t i = 0; i < n; ++i) scaled[i] = v[i] / eps;
  Vec label = tiling.membership(scaled);
  for (size_t i = 0; i < n; ++i) label[i] *= eps;

  for (size_t i = 0; i < n; ++i) label[i] -= offset[i];
  Vec rounded = matvec_t(rotation, wrap(label, q));

  return dist2(rounded, u) <= eps ? rounded : u;
}

Vec replicable_round(const Vec& u, const TilingOracle& tiling,
                     const RoundingParams& params, SharedRandomness& rand) {
  const size_t n = u.size();
  if (n != tiling.dim)
    throw std::invalid_argument("replicable_round: dimension mismatch");
  if (!(params.eps > 0.0 && params.eps < std::sqrt(double(n))))
    throw std::invalid_argument("replicable_round: eps in (0, sqrt(N))");
  if (norm_inf(u) > double(n))
    throw std::domain_error("replicable_round: input outside [-N, N]^N");

  const Mat rotation = draw_rotation(rand, int(n));
  const Vec offset = draw_uniform_cube(rand, int(n), params.wrap_half_width(n));
  return replicable_round_with(u, tiling, params, rotation, offset);
}

}  // namespace replicore
