#pragma once

#include <iosfwd>
#include <string>

#include "mspa/mspa.hpp"

namespace mspa {

/// Per-coordinate linear shift and scale onto [-1, 1]. Coordinates that are
/// constant in the training data map to 0 and are restored exactly.
struct Normalization {
  Vector lo;
  Vector hi;

  static Normalization fit(const Matrix& data);
  Vector forward(const Vector& x) const;
  Matrix forward(const Matrix& x) const;
  Vector inverse(const Vector& y) const;
  Matrix inverse(const Matrix& y) const;
};

/// Trained learning/lifting model: vertices live in normalized coordinates.
struct MspaModel {
  Normalization normalization;
  Matrix sigma_learn;  // D x K
  Matrix sigma_lift;   // D x K'
  Matrix lambda_hat;   // K x K^M
  Matrix lambda_lift;  // K' x K^M
  MemoryConfig mem;

  int dim() const { return int(sigma_learn.rows()); }
  int k() const { return int(sigma_learn.cols()); }
  int k_lift() const { return int(sigma_lift.cols()); }
};

/// Residuals of the four training sub-problems.
struct TrainReport {
  double spa1_learn = 0.0;
  double spa1_lift = 0.0;
  double mspa = 0.0;
  double spa2 = 0.0;  // memoryless fit underlying the mSPA initialization
  double lifting = 0.0;
};

/// End-to-end training: normalization, learning and lifting polytopes, the
/// memory propagator and the lifting map (targets aligned at the same time
/// index as the path affiliation inputs).
MspaModel train(const Matrix& data, int k, int k_lift, const MemoryConfig& mem,
                const SpaConfig& cfg, TrainReport* report = nullptr);

/// Projects raw warmup states, then alternates propagation, path-affiliation
/// bookkeeping, lifting, and denormalization. The warmup trajectory must be
/// at raw step resolution and cover (M-1)*memory_lag + 1 steps.
Matrix predict(const MspaModel& model, const Matrix& warmup_raw, int horizon);

/// Propagation in barycentric coordinates only. Warmup columns are spaced at
/// forward-step granularity and must cover the memory lags.
Matrix predict_barycentric(const Matrix& lambda_hat, const MemoryConfig& mem,
                           const Matrix& warmup_gammas, int horizon);
Matrix predict_barycentric(const MspaModel& model, const Matrix& warmup_gammas,
                           int horizon);

/// Projection of a raw-space trajectory onto the learning polytope at raw
/// resolution (rho for K <= D, chained reference descent otherwise).
Matrix project_trajectory(const Matrix& sigma, const Matrix& states);

/// Model file: a versioned key/value text document with numeric arrays
/// printed to 17 significant digits so reloading is exact.
void save_model(const std::string& path, const MspaModel& model);
MspaModel load_model(const std::string& path);
void write_model(std::ostream& out, const MspaModel& model);
MspaModel read_model(std::istream& in);

}  // namespace mspa
