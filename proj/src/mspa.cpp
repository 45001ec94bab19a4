#include "mspa/mspa.hpp"

#include <cmath>
#include <stdexcept>

namespace mspa {

void MemoryConfig::validate(int k) const {
  if (depth < 1 || memory_lag < 1 || forward_step < 1) {
    throw std::invalid_argument("MemoryConfig: depth, memory_lag and forward_step must be positive");
  }
  double entries = 1.0;
  for (int m = 0; m < depth; ++m) entries *= double(k);
  if (entries > 1e8) {
    throw std::invalid_argument("MemoryConfig: K^M exceeds the 1e8 entry limit");
  }
}

IndexOrdering::IndexOrdering(int k, int depth) : k_(k), depth_(depth) {
  if (k < 1 || depth < 1) throw std::invalid_argument("IndexOrdering: k and depth must be >= 1");
  double entries = 1.0;
  for (int m = 0; m < depth; ++m) entries *= double(k);
  if (entries > 1e8) throw std::invalid_argument("IndexOrdering: K^M exceeds the 1e8 entry limit");
  size_ = 1;
  for (int m = 0; m < depth; ++m) size_ *= k;
  stride0_ = size_ / k;
}

int IndexOrdering::digit(std::int64_t index, int pos) const {
  std::int64_t stride = 1;
  for (int m = depth_ - 1 - pos; m > 0; --m) stride *= k_;
  return int((index / stride) % k_);
}

std::vector<int> IndexOrdering::tuple_of(std::int64_t index) const {
  std::vector<int> tuple(depth_);
  for (int m = depth_ - 1; m >= 0; --m) {
    tuple[m] = int(index % k_);
    index /= k_;
  }
  return tuple;
}

std::int64_t IndexOrdering::index_of(const std::vector<int>& tuple) const {
  if (int(tuple.size()) != depth_) throw std::invalid_argument("IndexOrdering: tuple length mismatch");
  std::int64_t index = 0;
  for (int m = 0; m < depth_; ++m) index = index * k_ + tuple[m];
  return index;
}

Vector path_affiliation(const std::vector<Vector>& gammas,
                        const IndexOrdering& ordering) {
  if (int(gammas.size()) != ordering.depth()) {
    throw std::invalid_argument("path_affiliation: expected depth many vectors");
  }
  for (const auto& g : gammas) {
    if (g.size() != ordering.k()) {
      throw std::invalid_argument("path_affiliation: coordinate dimension mismatch");
    }
  }
  Vector psi = gammas[0];
  for (std::size_t m = 1; m < gammas.size(); ++m) {
    const Vector& g = gammas[m];
    Vector next(psi.size() * g.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
      next.segment(i * g.size(), g.size()) = psi[i] * g;
    }
    psi = std::move(next);
  }
  return psi;
}

std::vector<Vector> unpack_path_affiliation(const Vector& psi,
                                            const IndexOrdering& ordering) {
  if (psi.size() != ordering.size()) {
    throw std::invalid_argument("unpack_path_affiliation: size mismatch");
  }
  const int k = ordering.k();
  const int depth = ordering.depth();
  std::vector<Vector> out(depth, Vector::Zero(k));
  for (std::int64_t i = 0; i < psi.size(); ++i) {
    std::int64_t rest = i;
    for (int m = depth - 1; m >= 0; --m) {
      out[m][rest % k] += psi[i];
      rest /= k;
    }
  }
  return out;
}

Matrix memory_matrix_E(int k, int depth, const IndexOrdering& ordering) {
  if (depth < 2) throw std::invalid_argument("memory_matrix_E: not applicable for depth 1");
  if (k != ordering.k() || depth != ordering.depth()) {
    throw std::invalid_argument("memory_matrix_E: ordering mismatch");
  }
  Matrix e = Matrix::Zero(Eigen::Index(depth - 1) * k, ordering.size());
  for (std::int64_t j = 0; j < ordering.size(); ++j) {
    std::int64_t rest = j;
    for (int m = depth - 1; m >= 0; --m) {
      const int l = int(rest % k);
      rest /= k;
      if (m < depth - 1) e(Eigen::Index(m) * k + l, j) = 1.0;
    }
  }
  return e;
}

Matrix embed_spa2_as_mspa(const Matrix& lambda, int depth) {
  if (lambda.rows() != lambda.cols() || lambda.rows() == 0) {
    throw std::invalid_argument("embed_spa2_as_mspa: lambda must be square");
  }
  const int k = int(lambda.rows());
  const IndexOrdering ordering(k, depth);
  Matrix out(k, ordering.size());
  for (std::int64_t i = 0; i < ordering.size(); ++i) {
    out.col(i) = lambda.col(ordering.first_digit(i));
  }
  return out;
}

MspaFit solve_mspa(const Matrix& gamma, const MemoryConfig& mem,
                   const SpaConfig& cfg) {
  const int k = int(gamma.rows());
  const int t_len = int(gamma.cols());
  mem.validate(k);
  const int first_t = (mem.depth - 1) * mem.memory_lag;
  const int last_t = t_len - 1 - mem.forward_step;
  if (last_t < first_t) {
    throw std::invalid_argument("solve_mspa: series too short for a single training pair");
  }

  IndexPairs pairs;
  for (int t = first_t; t <= last_t; ++t) pairs.emplace_back(t, t + mem.forward_step);
  const StochasticFit memoryless = solve_spa2(gamma, pairs, cfg);
  if (mem.depth == 1) {
    // Identical problem; keep the memoryless solution bit for bit.
    return {memoryless.lambda, memoryless.residual, memoryless.iterations,
            memoryless.residual};
  }

  const IndexOrdering ordering(k, mem.depth);
  Matrix features(ordering.size(), pairs.size());
  Matrix targets(k, pairs.size());
  std::vector<Vector> lags(mem.depth);
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const int t = pairs[j].first;
    for (int m = 0; m < mem.depth; ++m) lags[m] = gamma.col(t - m * mem.memory_lag);
    features.col(Eigen::Index(j)) = path_affiliation(lags, ordering);
    targets.col(Eigen::Index(j)) = gamma.col(pairs[j].second);
  }

  Matrix init = embed_spa2_as_mspa(memoryless.lambda, mem.depth);
  StochasticFit fit = fit_column_stochastic(targets, features, std::move(init),
                                            cfg.tol, cfg.max_iter);
  if (fit.residual > memoryless.residual * (1.0 + 1e-12) + 1e-12) {
    throw std::logic_error("solve_mspa: residual exceeds the memoryless fit");
  }

  // Columns never touched by a training path affiliation carry no signal;
  // any stochastic value is optimal there, take the uniform one.
  const Vector feature_mass = features.rowwise().sum();
  for (Eigen::Index j = 0; j < fit.lambda.cols(); ++j) {
    if (feature_mass[j] == 0.0) fit.lambda.col(j).setConstant(1.0 / double(k));
  }
  return {std::move(fit.lambda), fit.residual, fit.iterations, memoryless.residual};
}

ClosedStep closed_step(const Matrix& theta_top, const Vector& psi,
                       const IndexOrdering& ordering) {
  if (theta_top.cols() != ordering.size() || psi.size() != ordering.size() ||
      theta_top.rows() != ordering.k()) {
    throw std::invalid_argument("closed_step: dimension mismatch");
  }
  ClosedStep step;
  step.next_gamma = renormalize_stochastic(theta_top * psi);
  if (ordering.depth() == 1) {
    step.next_psi = step.next_gamma;
    return step;
  }
  std::vector<Vector> history = unpack_path_affiliation(psi, ordering);
  std::vector<Vector> next(ordering.depth());
  next[0] = step.next_gamma;
  for (int m = 1; m < ordering.depth(); ++m) {
    next[m] = renormalize_stochastic(history[m - 1]);
  }
  step.next_psi = path_affiliation(next, ordering);
  return step;
}

}  // namespace mspa
