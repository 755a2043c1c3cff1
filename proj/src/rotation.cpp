#include "replicore/rotation.hpp"

#include <stdexcept>

namespace replicore {

Mat draw_rotation(SharedRandomness& rand, int n) {
  if (n < 1) throw std::invalid_argument("draw_rotation: need N >= 1");
  const size_t un = size_t(n);
  Mat m(un, un);
  for (size_t i = 0; i < un; ++i)
    for (size_t j = 0; j < un; ++j) m(i, j) = rand.normal();
  orthonormalize_columns(m);
  Lu d = lu_decompose(m);
  if (lu_det(d) < 0.0)
    for (size_t i = 0; i < un; ++i) m(i, un - 1) = -m(i, un - 1);
  return m;
}

}  // namespace replicore
