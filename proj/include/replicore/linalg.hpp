#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace replicore {

using Vec = std::vector<double>;

// Dense row-major matrix, desk-scale (N <= ~16 everywhere in this project).
struct Mat {
  size_t rows = 0, cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(size_t i, size_t j) { return a[i * cols + j]; }
  double operator()(size_t i, size_t j) const { return a[i * cols + j]; }

  static Mat identity(size_t n) {
    Mat m(n, n);
    for (size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline Vec matvec(const Mat& m, const Vec& x) {
  Vec y(m.rows, 0.0);
  for (size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

// y = M^T x; for orthogonal M this is the inverse action.
inline Vec matvec_t(const Mat& m, const Vec& x) {
  Vec y(m.cols, 0.0);
  for (size_t j = 0; j < m.cols; ++j) {
    double s = 0.0;
    for (size_t i = 0; i < m.rows; ++i) s += m(i, j) * x[i];
    y[j] = s;
  }
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows, b.cols);
  for (size_t i = 0; i < a.rows; ++i)
    for (size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      for (size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline double norm2(const Vec& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline double norm_inf(const Vec& x) {
  double s = 0.0;
  for (double v : x) s = std::max(s, std::fabs(v));
  return s;
}

inline double dist2(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline Vec sub(const Vec& x, const Vec& y) {
  Vec z(x.size());
  for (size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
  return z;
}

inline Vec add(const Vec& x, const Vec& y) {
  Vec z(x.size());
  for (size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
  return z;
}

// LU decomposition with partial pivoting. Returns false on (numerical)
// singularity.
struct Lu {
  Mat lu;
  std::vector<size_t> perm;
  int sign = 1;
  bool ok = false;
};

inline Lu lu_decompose(const Mat& m, double tol = 1e-12) {
  Lu r;
  r.lu = m;
  const size_t n = m.rows;
  r.perm.resize(n);
  for (size_t i = 0; i < n; ++i) r.perm[i] = i;
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    double best = std::fabs(r.lu(col, col));
    for (size_t i = col + 1; i < n; ++i) {
      const double v = std::fabs(r.lu(i, col));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < tol) return r;
    if (piv != col) {
      for (size_t j = 0; j < n; ++j) std::swap(r.lu(col, j), r.lu(piv, j));
      std::swap(r.perm[col], r.perm[piv]);
      r.sign = -r.sign;
    }
    for (size_t i = col + 1; i < n; ++i) {
      const double f = r.lu(i, col) / r.lu(col, col);
      r.lu(i, col) = f;
      for (size_t j = col + 1; j < n; ++j) r.lu(i, j) -= f * r.lu(col, j);
    }
  }
  r.ok = true;
  return r;
}

inline double lu_det(const Lu& d) {
  if (!d.ok) return 0.0;
  double det = d.sign;
  for (size_t i = 0; i < d.lu.rows; ++i) det *= d.lu(i, i);
  return det;
}

inline Vec lu_solve(const Lu& d, const Vec& b) {
  const size_t n = d.lu.rows;
  Vec y(n);
  for (size_t i = 0; i < n; ++i) {
    double s = b[d.perm[i]];
    for (size_t j = 0; j < i; ++j) s -= d.lu(i, j) * y[j];
    y[i] = s;
  }
  for (size_t i = n; i-- > 0;) {
    double s = y[i];
    for (size_t j = i + 1; j < n; ++j) s -= d.lu(i, j) * y[j];
    y[i] = s / d.lu(i, i);
  }
  return y;
}

inline Mat lu_inverse(const Lu& d) {
  const size_t n = d.lu.rows;
  Mat inv(n, n);
  Vec e(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    e.assign(n, 0.0);
    e[j] = 1.0;
    Vec col = lu_solve(d, e);
    for (size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

// Orthonormalizes the columns of m in place by modified Gram-Schmidt with a
// second sweep, fixing signs so every diagonal entry of the implicit
// triangular factor is positive. Throws on rank deficiency.
inline void orthonormalize_columns(Mat& m) {
  const size_t n = m.rows;
  for (size_t j = 0; j < m.cols; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (size_t k = 0; k < j; ++k) {
        double dot = 0.0;
        for (size_t i = 0; i < n; ++i) dot += m(i, k) * m(i, j);
        for (size_t i = 0; i < n; ++i) m(i, j) -= dot * m(i, k);
      }
    }
    double nrm = 0.0;
    for (size_t i = 0; i < n; ++i) nrm += m(i, j) * m(i, j);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) throw std::runtime_error("orthonormalize: rank deficient");
    // Sign convention: R_jj > 0, i.e. the pre-normalization projection of the
    // original column onto the new direction is positive. Since the original
    // column minus its projections points along m(:,j) already, dividing by
    // the positive norm realizes it.
    for (size_t i = 0; i < n; ++i) m(i, j) /= nrm;
  }
}

}  // namespace replicore
