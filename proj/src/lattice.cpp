#include "replicore/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "replicore/rng.hpp"

namespace replicore {

namespace {

struct TriangularSystem {
  Mat r;   // upper triangular factor of the basis
  Mat q;   // orthonormal columns
};

TriangularSystem qr_of(const Mat& basis) {
  const size_t n = basis.rows;
  TriangularSystem sys{Mat(n, n), basis};
  for (size_t j = 0; j < n; ++j) {
    for (size_t k = 0; k < j; ++k) {
      double dot = 0.0;
      for (size_t i = 0; i < n; ++i) dot += sys.q(i, k) * sys.q(i, j);
      sys.r(k, j) = dot;
      for (size_t i = 0; i < n; ++i) sys.q(i, j) -= dot * sys.q(i, k);
    }
    double nrm = 0.0;
    for (size_t i = 0; i < n; ++i) nrm += sys.q(i, j) * sys.q(i, j);
    nrm = std::sqrt(nrm);
    sys.r(j, j) = nrm;
    for (size_t i = 0; i < n; ++i) sys.q(i, j) /= nrm;
  }
  return sys;
}

// Schnorr-Euchner enumeration of all coefficient vectors a with
// |R a - c|^2 <= bound, nearest-first per level.
template <class Fn>
void enumerate_within(const Mat& r, const Vec& c, double bound, Fn&& emit) {
  const size_t n = r.rows;
  std::vector<long long> a(n, 0);
  std::vector<double> partial(n + 1, 0.0);  // partial[i] = cost of levels > i-1

  struct Frame {
    double center;
    long long step;  // 0, 1, -1, 2, -2, ...
  };
  std::vector<Frame> frames(n);

  // Depth-first over levels n-1 .. 0.
  size_t level = n;  // number of undecided levels; decide level-1 next
  auto descend = [&](size_t lvl) {
    double y = c[lvl];
    for (size_t j = lvl + 1; j < n; ++j) y -= r(lvl, j) * double(a[j]);
    frames[lvl] = Frame{y / r(lvl, lvl), 0};
  };

  descend(level - 1);
  size_t lvl = level - 1;
  for (;;) {
    Frame& f = frames[lvl];
    bool advanced = false;
    for (;;) {
      // next candidate offset in zig-zag order
      long long candidate = llround(f.center) + f.step;
      // advance step: 0 -> 1 -> -1 -> 2 -> -2 ...
      f.step = f.step > 0 ? -f.step : -f.step + 1;
      const double diff =
          (f.center - double(candidate)) * r(lvl, lvl);
      const double cost = partial[lvl + 1] + diff * diff;
      if (cost > bound) {
        // Both zig-zag arms exceed once two consecutive candidates fail;
        // check the next one before giving up on this level.
        long long candidate2 = llround(f.center) + f.step;
        const double diff2 = (f.center - double(candidate2)) * r(lvl, lvl);
        if (partial[lvl + 1] + diff2 * diff2 > bound) break;
        continue;
      }
      a[lvl] = candidate;
      partial[lvl] = cost;
      advanced = true;
      break;
    }
    if (!advanced) {
      // backtrack
      if (lvl == n - 1) return;
      ++lvl;
      continue;
    }
    if (lvl == 0) {
      emit(a, partial[0]);
      continue;  // try the next candidate at level 0
    }
    --lvl;
    descend(lvl);
  }
}

Vec lattice_point(const Mat& basis, const std::vector<long long>& coeffs) {
  Vec x(basis.rows, 0.0);
  for (size_t i = 0; i < basis.rows; ++i)
    for (size_t j = 0; j < basis.cols; ++j)
      x[i] += basis(i, j) * double(coeffs[j]);
  return x;
}

struct CvpHit {
  std::vector<long long> coeffs;
  double dist2;
};

// All coefficient vectors within tie_tol of the closest; [0] is the winner
// under the lexicographic tie rule.
std::vector<CvpHit> cvp_candidates(const Lattice& lattice, const Vec& target,
                                   double tie_tol) {
  const size_t n = lattice.basis.rows;
  const TriangularSystem sys = qr_of(lattice.basis);
  const Vec c = matvec_t(sys.q, target);

  // Babai rounding gives the initial bound.
  Vec real_coeffs = matvec(lattice.basis_inv, target);
  std::vector<long long> babai(n);
  for (size_t i = 0; i < n; ++i) babai[i] = llround(real_coeffs[i]);
  const Vec babai_point = lattice_point(lattice.basis, babai);
  double best = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = babai_point[i] - target[i];
    best += d * d;
  }

  std::vector<CvpHit> hits;
  enumerate_within(sys.r, c, best + tie_tol, [&](const std::vector<long long>& a,
                                                 double d2) {
    if (d2 < best - tie_tol) {
      best = d2;
      // drop hits that are no longer competitive
      std::vector<CvpHit> kept;
      for (auto& h : hits)
        if (h.dist2 <= best + tie_tol) kept.push_back(h);
      hits = std::move(kept);
    }
    if (d2 <= best + tie_tol) hits.push_back({a, d2});
  });
  if (hits.empty()) hits.push_back({babai, best});

  std::sort(hits.begin(), hits.end(), [&](const CvpHit& x, const CvpHit& y) {
    const bool xm = x.dist2 <= best + tie_tol;
    const bool ym = y.dist2 <= best + tie_tol;
    if (xm != ym) return xm;
    return x.coeffs < y.coeffs;
  });
  // keep only the minimizers
  std::vector<CvpHit> mins;
  for (auto& h : hits)
    if (h.dist2 <= best + tie_tol) mins.push_back(h);
  return mins;
}

double distance_to_lattice(const Lattice& lattice, const Vec& x) {
  return dist2(cvp(lattice, x), x);
}

}  // namespace

std::vector<long long> cvp_coeffs(const Lattice& lattice, const Vec& target) {
  return cvp_candidates(lattice, target, 1e-12).front().coeffs;
}

Vec cvp(const Lattice& lattice, const Vec& target) {
  return lattice_point(lattice.basis, cvp_coeffs(lattice, target));
}

std::vector<Vec> cvp_all_min(const Lattice& lattice, const Vec& target,
                             double tie_tol) {
  std::vector<Vec> points;
  for (auto& h : cvp_candidates(lattice, target, tie_tol))
    points.push_back(lattice_point(lattice.basis, h.coeffs));
  return points;
}

Lattice lattice_preprocess(const Mat& basis, double radius_budget) {
  const size_t n = basis.rows;
  if (n != basis.cols) throw std::invalid_argument("lattice: basis must be square");
  if (int(n) > kLatticeDimGuard)
    throw std::invalid_argument("lattice: dimension above the desk-scale guard");
  Lu d = lu_decompose(basis);
  if (!d.ok) throw std::invalid_argument("lattice: singular basis");

  Lattice lat;
  lat.basis = basis;
  lat.basis_inv = lu_inverse(d);

  // Shortest nonzero vector: enumerate inside the ball of the shortest basis
  // column.
  double min_col2 = 0.0;
  for (size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += basis(i, j) * basis(i, j);
    if (j == 0 || s < min_col2) min_col2 = s;
  }
  const TriangularSystem sys = qr_of(basis);
  const Vec zero(n, 0.0);
  double shortest2 = min_col2;
  enumerate_within(sys.r, zero, min_col2 + 1e-12,
                   [&](const std::vector<long long>& a, double d2) {
                     bool is_zero = true;
                     for (long long v : a)
                       if (v != 0) is_zero = false;
                     if (!is_zero && d2 < shortest2) shortest2 = d2;
                   });
  lat.lambda = std::sqrt(shortest2) / 2.0;

  // Covering radius: grid over the fundamental parallelepiped, refined by
  // pattern search, cross-checked with random probes.
  int grid = 20;
  if (n == 5) grid = 10;
  if (n == 6) grid = 6;
  auto refine = [&](Vec x, double step) {
    double best = distance_to_lattice(lat, x);
    while (step > 1e-7) {
      bool improved = false;
      for (size_t i = 0; i < n; ++i) {
        for (double dir : {+1.0, -1.0}) {
          Vec y = x;
          y[i] += dir * step;
          const double v = distance_to_lattice(lat, y);
          if (v > best) {
            best = v;
            x = y;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return best;
  };

  double mu = 0.0;
  Vec mu_arg(n, 0.0);
  std::vector<size_t> idx(n, 0);
  const size_t total = size_t(std::pow(double(grid), double(n)));
  for (size_t cell = 0; cell < total; ++cell) {
    size_t rem = cell;
    Vec u(n);
    for (size_t i = 0; i < n; ++i) {
      u[i] = (double(rem % size_t(grid)) + 0.5) / double(grid);
      rem /= size_t(grid);
    }
    Vec x = matvec(basis, u);
    const double v = distance_to_lattice(lat, x);
    if (v > mu) {
      mu = v;
      mu_arg = x;
    }
  }
  double cell_step = 0.0;
  for (size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += basis(i, j) * basis(i, j);
    cell_step = std::max(cell_step, std::sqrt(s) / double(grid));
  }
  mu = refine(mu_arg, cell_step);

  SharedRandomness probe_rng(0x5EEDC0DEULL);
  for (int probe = 0; probe < 10000; ++probe) {
    Vec u(n);
    for (size_t i = 0; i < n; ++i) u[i] = probe_rng.uniform01();
    Vec x = matvec(basis, u);
    const double v = distance_to_lattice(lat, x);
    if (v > mu) mu = refine(x, cell_step);
  }
  // the covering radius can never fall below the packing radius
  lat.mu = std::max(mu, lat.lambda);

  // Voronoi-relevant candidates inside the budget ball.
  const double budget =
      radius_budget > 0.0 ? radius_budget : 2.0 * lat.mu * (1.0 + 1e-9);
  std::vector<std::vector<long long>> shell;
  enumerate_within(sys.r, zero, budget * budget + 1e-9,
                   [&](const std::vector<long long>& a, double) {
                     bool is_zero = true;
                     for (long long v : a)
                       if (v != 0) is_zero = false;
                     if (!is_zero) shell.push_back(a);
                   });
  for (auto& a : shell) {
    Vec w = lattice_point(basis, a);
    Vec half(n);
    for (size_t i = 0; i < n; ++i) half[i] = w[i] / 2.0;
    const double scale = std::max(1.0, dist2(half, zero));
    const std::vector<Vec> mins = cvp_all_min(lat, half, 1e-9 * scale * scale);
    bool has_zero = false, has_w = false;
    for (const Vec& m : mins) {
      if (norm2(m) < 1e-9 * scale) has_zero = true;
      if (dist2(m, w) < 1e-9 * scale) has_w = true;
    }
    if (has_zero && has_w) lat.relevant_vectors.push_back(w);
  }
  return lat;
}

TilingOracle voronoi_tiling(const Lattice& lattice) {
  const size_t n = lattice.basis.rows;
  const double scale = 0.1 / lattice.mu;
  auto scaled = std::make_shared<Lattice>();
  scaled->basis = lattice.basis;
  scaled->basis_inv = lattice.basis_inv;
  for (auto& v : scaled->basis.a) v *= scale;
  for (auto& v : scaled->basis_inv.a) v /= scale;
  scaled->lambda = lattice.lambda * scale;
  scaled->mu = 0.1;
  for (const Vec& w : lattice.relevant_vectors) {
    Vec ws(w);
    for (double& v : ws) v *= scale;
    scaled->relevant_vectors.push_back(std::move(ws));
  }

  TilingOracle t;
  t.dim = n;
  t.gamma = 0.0;
  t.surface_area = double(n) / scaled->lambda;
  t.cell_radius = 0.1;
  t.membership = [scaled](const Vec& x) { return cvp(*scaled, x); };
  return t;
}

Mat read_basis_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open basis file: " + path);
  std::vector<Vec> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    Vec row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error("empty basis file: " + path);
  const size_t n = rows.size();
  for (auto& r : rows)
    if (r.size() != n) throw std::runtime_error("basis file must be square");
  Mat basis(n, n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j) basis(j, i) = rows[i][j];  // row i -> column i
  return basis;
}

}  // namespace replicore
