#pragma once

#include <string>
#include <vector>

#include "replicore/linalg.hpp"
#include "replicore/tiling.hpp"

namespace replicore {

struct Lattice {
  Mat basis;              // columns are basis vectors
  Mat basis_inv;
  std::vector<Vec> relevant_vectors;
  double lambda = 0.0;    // packing radius, half the shortest nonzero vector
  double mu = 0.0;        // covering radius, max distance to the lattice
};

inline constexpr int kLatticeDimGuard = 6;

// Full preprocessing: rank check, shortest vector by bounded enumeration,
// covering radius by grid maximization over the fundamental parallelepiped
// with local refinement and random probes, and the Voronoi-relevant vectors
// (w with |w| <= 2 mu whose half-point has 0 and w among its closest lattice
// points). radius_budget <= 0 selects the default 2 mu (1 + 1e-9) ball.
Lattice lattice_preprocess(const Mat& basis, double radius_budget = 0.0);

// Exact closest lattice vector by Fincke-Pohst style enumeration seeded at
// the Babai rounding; squared-distance ties within 1e-12 are broken by the
// lexicographically smallest coefficient vector.
Vec cvp(const Lattice& lattice, const Vec& target);

// Coefficients of the closest vector (same tie rule).
std::vector<long long> cvp_coeffs(const Lattice& lattice, const Vec& target);

// All lattice points whose squared distance to the target is within tie_tol
// of the minimum.
std::vector<Vec> cvp_all_min(const Lattice& lattice, const Vec& target,
                             double tie_tol = 1e-12);

// Voronoi tiling of the lattice rescaled so that the covering radius is 0.1;
// membership maps a point to its closest (rescaled) lattice vector and the
// declared surface area is N / lambda_rescaled.
TilingOracle voronoi_tiling(const Lattice& lattice);

// One row per line, whitespace-separated decimals; row i holds basis vector
// i (stored as column i).
Mat read_basis_file(const std::string& path);

}  // namespace replicore
