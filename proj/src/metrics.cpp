#include "mspa/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mspa {

double barycentric_error(const Vector& g, const Vector& g2) {
  if (g.size() != g2.size()) throw std::invalid_argument("barycentric_error: dimension mismatch");
  return (g - g2).norm();
}

double true_space_error(const Vector& x, const Vector& x2) {
  if (x.size() != x2.size()) throw std::invalid_argument("true_space_error: dimension mismatch");
  return (x - x2).norm();
}

double avg_k_step_error(const Matrix& truth, const Matrix& predictions, int k) {
  if (truth.rows() != predictions.rows() || truth.cols() != predictions.cols()) {
    throw std::invalid_argument("avg_k_step_error: series must be aligned");
  }
  if (k < 0 || k >= truth.cols()) throw std::invalid_argument("avg_k_step_error: invalid k");
  double sum = 0.0;
  const int n = int(truth.cols()) - k;
  for (int i = 0; i < n; ++i) {
    sum += (truth.col(i + k) - predictions.col(i + k)).norm();
  }
  return sum / double(n);
}

double hausdorff(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0 || b.cols() == 0) throw std::invalid_argument("hausdorff: empty point set");
  if (a.rows() != b.rows()) throw std::invalid_argument("hausdorff: dimension mismatch");
  const auto directed = [](const Matrix& from, const Matrix& to) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < from.cols(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.cols(); ++j) {
        nearest = std::min(nearest, (from.col(i) - to.col(j)).squaredNorm());
      }
      worst = std::max(worst, nearest);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

double autocorrelation(const std::vector<Matrix>& realizations, int coord, int lag) {
  if (realizations.empty()) throw std::invalid_argument("autocorrelation: no realizations");
  const Eigen::Index t_len = realizations.front().cols();
  if (lag < 0 || lag >= t_len) throw std::invalid_argument("autocorrelation: lag out of range");
  for (const auto& r : realizations) {
    if (coord < 0 || coord >= r.rows() || r.cols() != t_len) {
      throw std::invalid_argument("autocorrelation: inconsistent realizations or bad coordinate");
    }
  }
  double mean = 0.0;
  for (const auto& r : realizations) mean += r.row(coord).sum();
  mean /= double(realizations.size() * std::size_t(t_len));

  double acc = 0.0;
  for (const auto& r : realizations) {
    for (Eigen::Index t = 0; t + lag < t_len; ++t) {
      acc += (r(coord, t + lag) - mean) * (r(coord, t) - mean);
    }
  }
  return acc / (double(realizations.size()) * double(t_len - lag));
}

double projection_loss(const Matrix& data, const Matrix& sigma, const Matrix& gamma) {
  if (sigma.cols() != gamma.rows() || sigma.rows() != data.rows() ||
      gamma.cols() != data.cols()) {
    throw std::invalid_argument("projection_loss: dimension mismatch");
  }
  if (data.cols() == 0) throw std::invalid_argument("projection_loss: empty data");
  double acc = 0.0;
  for (Eigen::Index t = 0; t < data.cols(); ++t) {
    const double err = (data.col(t) - sigma * gamma.col(t)).norm();
    const double scale = data.col(t).norm();
    acc += scale > 0.0 ? err / scale : err;
  }
  return acc / double(data.cols());
}

}  // namespace mspa
