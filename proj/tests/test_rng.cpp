#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "replicore/rng.hpp"
#include "replicore/rotation.hpp"

using namespace replicore;

TEST_CASE("equal seeds give bit-identical streams") {
  SharedRandomness a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(a.position() == 1000);
  CHECK(a.digest() == b.digest());
}

TEST_CASE("position strictly increases and digest folds every draw") {
  SharedRandomness a(7);
  uint64_t last_pos = 0;
  std::set<uint64_t> digests;
  for (int i = 0; i < 100; ++i) {
    a.uniform01();
    CHECK(a.position() == last_pos + 1);
    last_pos = a.position();
    digests.insert(a.digest());
  }
  CHECK(digests.size() == 100);
}

TEST_CASE("children are pure functions of (seed, index)") {
  SharedRandomness a(99), b(99);
  a.next_u64();  // advancing the parent must not change the children
  SharedRandomness ca = a.child(5), cb = b.child(5);
  for (int i = 0; i < 100; ++i) CHECK(ca.next_u64() == cb.next_u64());
  SharedRandomness other = a.child(6);
  CHECK(other.next_u64() != a.child(5).next_u64());
}

TEST_CASE("draw_uniform_interval basics") {
  SharedRandomness a(1), b(1);
  for (int i = 0; i < 100; ++i) {
    const double x = draw_uniform_interval(a, 2.0, 3.0);
    CHECK(x >= 2.0);
    CHECK(x < 3.0);
    CHECK(x == draw_uniform_interval(b, 2.0, 3.0));
  }
  CHECK_THROWS_AS(draw_uniform_interval(a, 2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(draw_uniform_interval(a, 3.0, 2.0), std::invalid_argument);
}

TEST_CASE("uniform draws have the right mean") {
  SharedRandomness a(123);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += draw_uniform_interval(a, 0.0, 1.0);
  CHECK(std::fabs(sum / n - 0.5) < 0.01);
}

TEST_CASE("draw_uniform_cube bounds, determinism and variance") {
  SharedRandomness a(5), b(5);
  auto x = draw_uniform_cube(a, 1, 5.0);
  CHECK(x.size() == 1);
  CHECK(x[0] >= -5.0);
  CHECK(x[0] < 5.0);
  CHECK(x == draw_uniform_cube(b, 1, 5.0));
  CHECK_THROWS_AS(draw_uniform_cube(a, 1, 0.0), std::invalid_argument);

  // variance of U(-1,1) is 1/3
  SharedRandomness c(17);
  const int n = 100000;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = draw_uniform_cube(c, 1, 1.0)[0];
    ss += v * v;
  }
  CHECK(std::fabs(ss / n - 1.0 / 3.0) < 0.02);
}

TEST_CASE("rotations are orthogonal with determinant +1") {
  SharedRandomness a(11);
  for (int n : {1, 2, 3, 5, 8}) {
    const Mat r = draw_rotation(a, n);
    if (n == 1) CHECK(r(0, 0) == doctest::Approx(1.0));
    // R^T R = I
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int k = 0; k < n; ++k) dot += r(k, i) * r(k, j);
        CHECK(std::fabs(dot - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
    CHECK(std::fabs(lu_det(lu_decompose(r)) - 1.0) < 1e-10);
  }
}

TEST_CASE("rotation is an isometry") {
  SharedRandomness a(13);
  const int n = 6;
  for (int rep = 0; rep < 20; ++rep) {
    const Mat r = draw_rotation(a, n);
    Vec x(n);
    for (auto& v : x) v = a.normal();
    CHECK(std::fabs(norm2(matvec(r, x)) - norm2(x)) < 1e-9);
  }
}

TEST_CASE("rotation first column is uniform on the sphere") {
  SharedRandomness a(19);
  const int n = 3, draws = 10000;
  Vec mean(n, 0.0);
  for (int i = 0; i < draws; ++i) {
    const Mat r = draw_rotation(a, n);
    for (int k = 0; k < n; ++k) mean[k] += r(k, 0);
  }
  for (int k = 0; k < n; ++k) mean[k] /= draws;
  CHECK(norm2(mean) <= 0.05);
}

TEST_CASE("Haar invariance: R u matches R e1 in distribution") {
  // two-sample KS on the first coordinate at significance 0.01
  SharedRandomness a(29);
  const int n = 4, draws = 10000;
  Vec u(n, 0.0);
  u[0] = 0.3;
  u[1] = -0.5;
  u[2] = 0.8;
  u[3] = 0.1;
  const double nu = norm2(u);
  std::vector<double> ru, re1;
  for (int i = 0; i < draws; ++i) {
    const Mat r = draw_rotation(a, n);
    Vec x = matvec(r, u);
    ru.push_back(x[0] / nu);
    const Mat r2 = draw_rotation(a, n);
    re1.push_back(r2(0, 0));
  }
  std::sort(ru.begin(), ru.end());
  std::sort(re1.begin(), re1.end());
  double ks = 0.0;
  size_t i = 0, j = 0;
  while (i < ru.size() && j < re1.size()) {
    if (ru[i] <= re1[j])
      ++i;
    else
      ++j;
    ks = std::max(ks, std::fabs(double(i) / ru.size() - double(j) / re1.size()));
  }
  const double critical = 1.628 * std::sqrt(2.0 / draws);
  CHECK(ks < critical);
}
