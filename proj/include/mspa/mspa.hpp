#pragma once

#include <cstdint>
#include <vector>

#include "mspa/spa.hpp"

namespace mspa {

/// Memory configuration: depth M, the lag between delayed coordinates, and
/// the forward prediction step, both counted in raw time steps.
struct MemoryConfig {
  int depth = 1;
  int memory_lag = 1;
  int forward_step = 1;

  void validate(int k) const;  // also rejects K^M > 1e8
};

/// Bijection between linear indices {0..K^M-1} and index tuples
/// (i_1,...,i_M), lexicographic with the last tuple entry varying fastest.
/// Tuple position 0 always refers to the most recent coordinate vector.
class IndexOrdering {
 public:
  IndexOrdering(int k, int depth);

  int k() const { return k_; }
  int depth() const { return depth_; }
  std::int64_t size() const { return size_; }

  int digit(std::int64_t index, int pos) const;  // tuple entry at position pos
  int first_digit(std::int64_t index) const { return int(index / stride0_); }
  std::vector<int> tuple_of(std::int64_t index) const;
  std::int64_t index_of(const std::vector<int>& tuple) const;

 private:
  int k_;
  int depth_;
  std::int64_t size_;
  std::int64_t stride0_;  // K^(M-1)
};

/// Path affiliation of M stochastic vectors, most recent first: the entry at
/// linear index i is the product gammas[0][i_1] * ... * gammas[M-1][i_M].
Vector path_affiliation(const std::vector<Vector>& gammas,
                        const IndexOrdering& ordering);

/// Lag-wise marginals of a path affiliation vector; inverts path_affiliation
/// on its image. Output m sums the entries whose m-th tuple index matches.
std::vector<Vector> unpack_path_affiliation(const Vector& psi,
                                            const IndexOrdering& ordering);

/// Binary ((M-1)K x K^M) matrix that recovers the first M-1 coordinate
/// vectors from a path affiliation: row (m*K + l) sums all entries whose
/// m-th tuple index equals l.
Matrix memory_matrix_E(int k, int depth, const IndexOrdering& ordering);

/// Expands a K x K propagator to an equivalent K x K^M memory propagator:
/// column i is the column of `lambda` selected by the first tuple index of i.
Matrix embed_spa2_as_mspa(const Matrix& lambda, int depth);

struct MspaFit {
  Matrix lambda;           // K x K^M
  double residual = 0.0;
  int iterations = 0;
  double spa2_residual = 0.0;  // memoryless fit on the same training pairs
};

/// Memory propagator estimation: inputs are path affiliations built from
/// gamma at lags (t, t-tau, ..., t-(M-1)tau), targets are gamma at t+dt.
/// Initialized at the embedded memoryless solution, so the residual never
/// exceeds the memoryless one on the same pairs.
MspaFit solve_mspa(const Matrix& gamma, const MemoryConfig& mem,
                   const SpaConfig& cfg);

struct ClosedStep {
  Vector next_gamma;
  Vector next_psi;
};

/// One step of the closed memory dynamics: next_gamma = lambda * psi, the
/// retained history is recovered by marginalization, and the next path
/// affiliation is rebuilt from (next_gamma, history).
ClosedStep closed_step(const Matrix& theta_top, const Vector& psi,
                       const IndexOrdering& ordering);

}  // namespace mspa
