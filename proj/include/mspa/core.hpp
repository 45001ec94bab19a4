#pragma once

#include <Eigen/Dense>

namespace mspa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Absolute tolerance on the entry sum of stochastic vectors.
inline constexpr double kStochasticTol = 1e-10;

bool is_stochastic_vector(const Vector& v, double tol = kStochasticTol);
bool is_column_stochastic(const Matrix& m, double tol = kStochasticTol);

/// Clips entries to [0,1] and rescales so they sum to one. A vector whose
/// clipped sum vanishes is replaced by the uniform vector.
Vector renormalize_stochastic(Vector v);

/// Euclidean projection onto the unit simplex, computed by the exact
/// sorting-based algorithm in O(K log K).
Vector project_to_unit_simplex(const Vector& v);

/// Lifts barycentric coordinates to a point: returns sigma * gamma.
Vector barycentric_to_point(const Matrix& sigma, const Vector& gamma);

struct PowerIterationResult {
  Vector gamma;
  int iterations = 0;
};

/// Power iteration from the uniform vector for the dominant eigenvector of a
/// column-stochastic matrix. Stops once ||lambda*g - g||_2 <= tol; throws if
/// max_iter is exhausted (possible with complex unit-modulus spectrum).
PowerIterationResult dominant_eigvec_stochastic(const Matrix& lambda,
                                                double tol = 1e-12,
                                                int max_iter = 100000);

/// Exact minimizer of ||x - A g||_2 over the unit simplex (active-set
/// pivoting on the nonnegativity constraints). Requires the columns of A to
/// be affinely independent so the KKT systems stay nonsingular.
Vector simplex_least_squares(const Matrix& a, const Vector& x);

/// Monotone accelerated projected gradient for the same objective, warm
/// started at g0. The returned residual never exceeds the residual at g0.
Vector simplex_least_squares_pg(const Matrix& a, const Vector& x,
                                const Vector& g0, double tol = 1e-12,
                                int max_iter = 20000);

/// Largest eigenvalue of a symmetric positive semi-definite matrix,
/// estimated by power iteration from a fixed deterministic start vector.
double sym_largest_eigenvalue(const Matrix& g, int iters = 200);

}  // namespace mspa
