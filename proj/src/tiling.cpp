#include "replicore/tiling.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace replicore {

double wrap_scalar(double x, double q) {
  const double two_q = 2.0 * q;
  double m = std::fmod(x + q, two_q);
  if (m < 0.0) m += two_q;
  return m - q;
}

Vec wrap(const Vec& x, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("wrap: need Q > 0");
  Vec y(x.size());
  for (size_t i = 0; i < x.size(); ++i) y[i] = wrap_scalar(x[i], q);
  return y;
}

TilingOracle cube_tiling(size_t n, double side) {
  if (n < 1) throw std::invalid_argument("cube_tiling: need N >= 1");
  const double radius = side * std::sqrt(double(n)) / 2.0;
  if (!(side > 0.0) || radius > 0.1 + 1e-12)
    throw std::invalid_argument("cube_tiling: side too large, need s*sqrt(N)/2 <= 0.1");
  TilingOracle t;
  t.dim = n;
  t.gamma = 0.0;
  t.surface_area = 2.0 * double(n) / side;
  t.cell_radius = radius;
  t.membership = [side, n](const Vec& x) {
    Vec label(n);
    for (size_t i = 0; i < n; ++i)
      label[i] = (std::floor(x[i] / side) + 0.5) * side;
    return label;
  };
  return t;
}

TilingOracle boost_membership(const TilingOracle& noisy, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("boost_membership: delta in (0,1)");
  const int votes = 2 * int(std::ceil(std::log2(1.0 / delta))) + 1;
  TilingOracle t = noisy;
  auto inner = noisy.membership;
  t.membership = [inner, votes](const Vec& x) {
    std::map<Vec, int> tally;
    for (int i = 0; i < votes; ++i) {
      Vec label = inner(x);
      if (++tally[label] > votes / 2) return label;
    }
    int best = -1;
    Vec out;
    for (auto& [label, count] : tally)
      if (count > best) {
        best = count;
        out = label;
      }
    return out;
  };
  return t;
}

}  // namespace replicore
