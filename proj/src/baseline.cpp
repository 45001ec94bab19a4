#include "mspa/baseline.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace mspa {

ArModel fit_ar(const Matrix& data, int depth, int forward_step, int memory_lag) {
  if (depth < 1 || forward_step < 1 || memory_lag < 1) {
    throw std::invalid_argument("fit_ar: depth, forward_step and memory_lag must be positive");
  }
  const int d = int(data.rows());
  const int t_len = int(data.cols());
  const int first_t = (depth - 1) * memory_lag;
  const int last_t = t_len - 1 - forward_step;
  if (last_t < first_t) throw std::invalid_argument("fit_ar: insufficient data");

  const int n = last_t - first_t + 1;
  Matrix features(d * depth, n);
  Matrix targets(d, n);
  for (int j = 0; j < n; ++j) {
    const int t = first_t + j;
    for (int m = 0; m < depth; ++m) {
      features.block(m * d, j, d, 1) = data.col(t - m * memory_lag);
    }
    targets.col(j) = data.col(t + forward_step);
  }
  Matrix gram = features * features.transpose();
  // Scaled so the term stays active against the Gram's own rounding noise;
  // for rank-deficient problems this approaches the minimum-norm solution.
  gram.diagonal().array() += 1e-10 * std::max(1.0, gram.diagonal().maxCoeff());
  ArModel model{d, depth, memory_lag, forward_step, Matrix()};
  model.theta = gram.ldlt().solve(features * targets.transpose()).transpose();
  return model;
}

Matrix predict_ar(const ArModel& model, const Matrix& warmup, int horizon) {
  if (horizon < 0) throw std::invalid_argument("predict_ar: negative horizon");
  if (warmup.rows() != model.dim) throw std::invalid_argument("predict_ar: dimension mismatch");
  if (model.memory_lag % model.forward_step != 0) {
    throw std::invalid_argument("predict_ar: memory_lag must be a multiple of forward_step");
  }
  const int q = model.memory_lag / model.forward_step;
  const int span = (model.depth - 1) * model.memory_lag;
  if (warmup.cols() < span + 1) throw std::invalid_argument("predict_ar: insufficient warmup");

  // History at forward-step granularity, most recent last.
  std::deque<Vector> history;
  for (int j = (model.depth - 1) * q; j >= 0; --j) {
    history.push_back(warmup.col(warmup.cols() - 1 - Eigen::Index(j) * model.forward_step));
  }

  Matrix out(model.dim, horizon);
  Vector stacked(model.dim * model.depth);
  for (int step = 0; step < horizon; ++step) {
    for (int m = 0; m < model.depth; ++m) {
      stacked.segment(m * model.dim, model.dim) = history[history.size() - 1 - std::size_t(m) * q];
    }
    Vector next = model.theta * stacked;
    if (!next.allFinite()) {
      throw std::runtime_error("predict_ar: non-finite state at step " + std::to_string(step + 1));
    }
    out.col(step) = next;
    history.push_back(std::move(next));
    history.pop_front();
  }
  return out;
}

}  // namespace mspa
