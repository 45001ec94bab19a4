#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "mspa/core.hpp"
#include "test_util.hpp"

using namespace mspa;
using testutil::random_column_stochastic;
using testutil::random_stochastic;
using testutil::random_vector;

namespace {

// Exhaustive search over a simplex grid with `res` subdivisions per unit.
Vector grid_oracle_projection(const Vector& v, int res) {
  const int k = int(v.size());
  Vector best = Vector::Zero(k);
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> counts(k, 0);
  // Enumerate compositions of `res` into k parts.
  std::function<void(int, int)> recurse = [&](int pos, int remaining) {
    if (pos == k - 1) {
      counts[pos] = remaining;
      Vector g(k);
      for (int i = 0; i < k; ++i) g[i] = double(counts[i]) / double(res);
      const double d = (v - g).squaredNorm();
      if (d < best_dist) {
        best_dist = d;
        best = g;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[pos] = c;
      recurse(pos + 1, remaining - c);
    }
  };
  recurse(0, res);
  return best;
}

}  // namespace

TEST_CASE("simplex projection leaves stochastic vectors unchanged") {
  Vector v(2);
  v << 0.5, 0.5;
  CHECK((project_to_unit_simplex(v) - v).norm() == doctest::Approx(0.0));

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector g = random_stochastic(rng, 6);
    CHECK((project_to_unit_simplex(g) - g).norm() < 1e-12);
  }
}

TEST_CASE("simplex projection picks the nearest vertex") {
  Vector v(2);
  v << 2.0, 0.0;
  Vector expected(2);
  expected << 1.0, 0.0;
  CHECK((project_to_unit_simplex(v) - expected).norm() == doctest::Approx(0.0));
}

TEST_CASE("simplex projection matches the grid oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector v3 = random_vector(rng, 3, -0.5, 1.5);
    const Vector oracle = grid_oracle_projection(v3, 1000);
    CHECK((project_to_unit_simplex(v3) - oracle).norm() <= 2e-3);
  }
  // The full 5-dimensional grid at 1e-3 has ~4e10 nodes; a coarser grid with
  // the matching tolerance covers the higher-dimensional case.
  for (int trial = 0; trial < 3; ++trial) {
    const Vector v5 = random_vector(rng, 5, -0.5, 1.5);
    const Vector oracle = grid_oracle_projection(v5, 50);
    CHECK((project_to_unit_simplex(v5) - oracle).norm() <= 2.0 / 50.0);
  }
}

TEST_CASE("simplex projection rejects the empty vector") {
  CHECK_THROWS_AS(project_to_unit_simplex(Vector()), std::invalid_argument);
}

TEST_CASE("simplex projection output is stochastic and non-expansive") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector u = random_vector(rng, 7, -3.0, 3.0);
    const Vector v = random_vector(rng, 7, -3.0, 3.0);
    const Vector pu = project_to_unit_simplex(u);
    const Vector pv = project_to_unit_simplex(v);
    CHECK(is_stochastic_vector(pu));
    CHECK((pu - pv).norm() <= (u - v).norm() + 1e-14);
  }
}

TEST_CASE("barycentric lifting") {
  Matrix sigma(2, 2);
  sigma << 1.0, 0.0, 0.0, 1.0;
  Vector g(2);
  g << 1.0, 0.0;
  CHECK((barycentric_to_point(sigma, g) - sigma.col(0)).norm() == doctest::Approx(0.0));

  std::mt19937_64 rng(3);
  const Matrix rand_sigma = testutil::random_matrix(rng, 4, 3);
  const Vector uniform = Vector::Constant(3, 1.0 / 3.0);
  CHECK((barycentric_to_point(rand_sigma, uniform) - rand_sigma.rowwise().mean()).norm() < 1e-14);

  Matrix sigma5 = testutil::random_matrix(rng, 5, 3);
  Vector w(3);
  w << 0.2, 0.3, 0.5;
  const Vector expected = 0.2 * sigma5.col(0) + 0.3 * sigma5.col(1) + 0.5 * sigma5.col(2);
  CHECK((barycentric_to_point(sigma5, w) - expected).norm() < 1e-14);

  CHECK_THROWS_AS(barycentric_to_point(sigma5, Vector::Ones(4)), std::invalid_argument);
}

TEST_CASE("products with column-stochastic matrices stay stochastic") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix lambda = random_column_stochastic(rng, 5, 5);
    const Vector g = random_stochastic(rng, 5);
    CHECK(is_stochastic_vector(lambda * g, 1e-9));
  }
}

TEST_CASE("dominant eigenvector: identity returns the uniform start") {
  const auto result = dominant_eigvec_stochastic(Matrix::Identity(4, 4), 1e-12, 10);
  CHECK(result.iterations == 1);
  CHECK((result.gamma - Vector::Constant(4, 0.25)).norm() < 1e-14);
}

TEST_CASE("dominant eigenvector: symmetric doubly stochastic case") {
  Matrix lambda(2, 2);
  lambda << 0.5, 0.5, 0.5, 0.5;
  const auto result = dominant_eigvec_stochastic(lambda, 1e-12, 100);
  CHECK((result.gamma - Vector::Constant(2, 0.5)).norm() < 1e-12);
}

TEST_CASE("dominant eigenvector matches a dense eigensolver") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix lambda = random_column_stochastic(rng, 4, 4);
    const auto result = dominant_eigvec_stochastic(lambda, 1e-13, 100000);
    CHECK((lambda * result.gamma - result.gamma).norm() <= 1e-13);

    Eigen::EigenSolver<Matrix> es(lambda);
    int top = 0;
    for (int i = 1; i < 4; ++i) {
      if (std::abs(es.eigenvalues()[i].real() - 1.0) + std::abs(es.eigenvalues()[i].imag()) <
          std::abs(es.eigenvalues()[top].real() - 1.0) + std::abs(es.eigenvalues()[top].imag())) {
        top = i;
      }
    }
    Vector fixed = es.eigenvectors().col(top).real();
    fixed /= fixed.sum();
    CHECK((result.gamma - fixed).norm() < 1e-8);
  }
}

TEST_CASE("iterating a stochastic matrix reaches a fixed point") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix lambda = random_column_stochastic(rng, 6, 6);
    Vector g = random_stochastic(rng, 6);
    for (int it = 0; it < 20000; ++it) {
      const Vector next = lambda * g;
      if ((next - g).norm() < 1e-13) break;
      g = next;
    }
    CHECK((lambda * g - g).norm() <= 1e-10);
  }
}

TEST_CASE("exact simplex least squares recovers interior coordinates") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = testutil::random_matrix(rng, 6, 4);
    const Vector truth = random_stochastic(rng, 4);
    const Vector g = simplex_least_squares(a, a * truth);
    CHECK((a * g - a * truth).norm() < 1e-10);
  }
}

TEST_CASE("projected-gradient simplex least squares never worsens the start") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testutil::random_matrix(rng, 2, 5);  // over-complete
    const Vector x = random_vector(rng, 2);
    const Vector start = random_stochastic(rng, 5);
    const Vector g = simplex_least_squares_pg(a, x, start);
    CHECK(is_stochastic_vector(g, 1e-9));
    CHECK((x - a * g).norm() <= (x - a * start).norm() + 1e-12);
  }
}
