#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mspa/core.hpp"

namespace mspa {

/// Shared solver configuration for the SPA problems.
struct SpaConfig {
  double tol = 1e-8;      // relative objective decrease
  int max_iter = 1000;
  std::uint64_t seed = 0;
  int restarts = 5;
};

struct SpaSolution {
  Matrix sigma;   // D x K vertices
  Matrix gamma;   // K x T stochastic columns
  double objective = 0.0;  // ||X - sigma*gamma||_F
  int iterations = 0;
  int restarts_used = 0;
  std::vector<double> objective_history;  // objective after every outer iteration
};

struct StochasticFit {
  Matrix lambda;
  double residual = 0.0;  // Frobenius norm of the misfit
  int iterations = 0;
};

using IndexPairs = std::vector<std::pair<int, int>>;  // (input index, target index)

/// Consecutive one-step pairs (t -> t+forward) over a series of length t_len.
IndexPairs consecutive_pairs(int t_len, int forward = 1);

/// Alternating minimization for the polytope factorization: the gamma step
/// solves the simplex-constrained least squares per column with a monotone
/// accelerated projected gradient, the sigma step is closed-form least
/// squares. Returns the best of `cfg.restarts` seeded initializations.
SpaSolution solve_spa1(const Matrix& data, int k, const SpaConfig& cfg);

/// Column-stochastic propagator fit: minimizes ||gamma[targets] -
/// lambda*gamma[inputs]||_F. Initialized at the identity so the residual can
/// never exceed the identity's.
StochasticFit solve_spa2(const Matrix& gamma, const IndexPairs& pairs,
                         const SpaConfig& cfg);

/// General column-stochastic regression ||targets - lambda*features||_F,
/// solved by monotone accelerated projected gradient from `init`.
StochasticFit fit_column_stochastic(const Matrix& targets, const Matrix& features,
                                    Matrix init, double tol, int max_iter);

/// True iff the columns of sigma are affinely independent: the (K-1)-th
/// singular value of the centered vertex matrix exceeds 1e-10.
bool affinely_independent(const Matrix& sigma);

/// Barycentric coordinates of the orthogonal projection onto conv(sigma),
/// K <= D case. Unique under affine independence of the vertices.
Vector rho_small_k(const Matrix& sigma, const Vector& x);

/// Over-complete case K > D: local minimizer of ||x - sigma*g||_2 obtained by
/// monotone projected gradient descent from `reference`.
Vector rho_large_k(const Matrix& sigma, const Vector& x, const Vector& reference);

}  // namespace mspa
