#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mspa/metrics.hpp"
#include "test_util.hpp"

using namespace mspa;
using testutil::random_matrix;
using testutil::random_stochastic;
using testutil::random_vector;

TEST_CASE("pointwise errors") {
  Vector e1 = Vector::Zero(3), e2 = Vector::Zero(3);
  e1[0] = 1.0;
  e2[1] = 1.0;
  CHECK(barycentric_error(e1, e1) == doctest::Approx(0.0));
  CHECK(barycentric_error(e1, e2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(true_space_error(e1, e1) == doctest::Approx(0.0));

  Vector x(4), y(4);
  x << 1, 2, 3, 4;
  y = x;
  y[2] += 1.0;
  CHECK(true_space_error(x, y) == doctest::Approx(1.0));

  std::mt19937_64 rng(3);
  const Vector a = random_vector(rng, 5);
  const Vector b = random_vector(rng, 5);
  CHECK(barycentric_error(a, b) == doctest::Approx((a - b).norm()));
  CHECK_THROWS_AS(barycentric_error(a, Vector::Zero(4)), std::invalid_argument);
}

TEST_CASE("true-space error is bounded by the polytope operator norm") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix sigma = random_matrix(rng, 4, 3);
    const Vector g1 = random_stochastic(rng, 3);
    const Vector g2 = random_stochastic(rng, 3);
    const double lhs = true_space_error(sigma * g1, sigma * g2);
    const double opnorm = sigma.jacobiSvd().singularValues()[0];
    CHECK(lhs <= opnorm * barycentric_error(g1, g2) + 1e-12);
  }
}

TEST_CASE("average k-step error") {
  std::mt19937_64 rng(7);
  const Matrix truth = random_matrix(rng, 3, 10);
  CHECK(avg_k_step_error(truth, truth, 3) == doctest::Approx(0.0));

  Matrix pred = truth;
  pred.col(9) += Vector::Ones(3);
  CHECK(avg_k_step_error(truth, pred, 9) == doctest::Approx(std::sqrt(3.0)));

  // Brute-force oracle on a small random case.
  const Matrix p2 = random_matrix(rng, 3, 10);
  const int k = 4;
  double acc = 0.0;
  for (int i = 0; i + k < 10; ++i) acc += (truth.col(i + k) - p2.col(i + k)).norm();
  CHECK(avg_k_step_error(truth, p2, k) == doctest::Approx(acc / 6.0));
}

TEST_CASE("hausdorff distance") {
  std::mt19937_64 rng(11);
  const Matrix a = random_matrix(rng, 3, 12);
  CHECK(hausdorff(a, a) == doctest::Approx(0.0));

  Matrix p(2, 1), q(2, 1);
  p << 1.0, 2.0;
  q << 4.0, 6.0;
  CHECK(hausdorff(p, q) == doctest::Approx(5.0));

  // Brute-force double loop oracle.
  const Matrix b = random_matrix(rng, 3, 10);
  double ab = 0.0;
  for (int i = 0; i < a.cols(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < b.cols(); ++j) nearest = std::min(nearest, (a.col(i) - b.col(j)).norm());
    ab = std::max(ab, nearest);
  }
  double ba = 0.0;
  for (int j = 0; j < b.cols(); ++j) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < a.cols(); ++i) nearest = std::min(nearest, (a.col(i) - b.col(j)).norm());
    ba = std::max(ba, nearest);
  }
  CHECK(hausdorff(a, b) == doctest::Approx(std::max(ab, ba)));
  CHECK(hausdorff(b, a) == doctest::Approx(hausdorff(a, b)));
}

TEST_CASE("hausdorff satisfies the triangle inequality on random triples") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(rng, 2, 6);
    const Matrix b = random_matrix(rng, 2, 8);
    const Matrix c = random_matrix(rng, 2, 5);
    CHECK(hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12);
  }
}

TEST_CASE("autocorrelation of a constant series vanishes") {
  const std::vector<Matrix> series{Matrix::Ones(2, 20) * 0.4};
  CHECK(autocorrelation(series, 0, 5) == doctest::Approx(0.0));
}

TEST_CASE("autocorrelation at lag zero is the mean squared deviation") {
  std::mt19937_64 rng(17);
  const Matrix r1 = random_matrix(rng, 2, 15);
  const Matrix r2 = random_matrix(rng, 2, 15);
  const std::vector<Matrix> series{r1, r2};
  const double mean = (r1.row(1).sum() + r2.row(1).sum()) / 30.0;
  double acc = 0.0;
  for (int t = 0; t < 15; ++t) {
    acc += (r1(1, t) - mean) * (r1(1, t) - mean);
    acc += (r2(1, t) - mean) * (r2(1, t) - mean);
  }
  CHECK(autocorrelation(series, 1, 0) == doctest::Approx(acc / 30.0));
}

TEST_CASE("autocorrelation matches a hand-expanded sum") {
  Matrix r1(1, 5), r2(1, 5);
  r1 << 1, 2, 3, 4, 5;
  r2 << 2, 2, 1, 0, 5;
  const std::vector<Matrix> series{r1, r2};
  const int lag = 2;
  const double mean = 2.5;
  double acc = 0.0;
  for (int t = 0; t + lag < 5; ++t) {
    acc += (r1(0, t + lag) - mean) * (r1(0, t) - mean);
    acc += (r2(0, t + lag) - mean) * (r2(0, t) - mean);
  }
  CHECK(autocorrelation(series, 0, lag) == doctest::Approx(acc / (2.0 * 3.0)));
}

TEST_CASE("projection loss") {
  std::mt19937_64 rng(19);
  const Matrix sigma = random_matrix(rng, 4, 3);
  Matrix gamma(3, 10);
  for (int j = 0; j < 10; ++j) gamma.col(j) = random_stochastic(rng, 3);
  const Matrix on_polytope = sigma * gamma;
  CHECK(projection_loss(on_polytope, sigma, gamma) <= 1e-12);

  // K = 1: every reconstruction is the single vertex.
  const Matrix data = random_matrix(rng, 4, 8);
  const Matrix vertex = data.rowwise().mean();
  const Matrix ones = Matrix::Ones(1, 8);
  double acc = 0.0;
  for (int t = 0; t < 8; ++t) acc += (data.col(t) - vertex).norm() / data.col(t).norm();
  CHECK(projection_loss(data, vertex, ones) == doctest::Approx(acc / 8.0));

  // Zero-norm columns contribute their absolute error.
  Matrix z = Matrix::Zero(4, 1);
  CHECK(projection_loss(z, vertex, Matrix::Ones(1, 1)) == doctest::Approx(vertex.norm()));
}
