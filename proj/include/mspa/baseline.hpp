#pragma once

#include "mspa/core.hpp"

namespace mspa {

/// Linear autoregressive model on stacked lagged states. The coefficient
/// matrix maps [x_t; x_{t-lag}; ...; x_{t-(M-1)lag}] to x_{t+forward}.
struct ArModel {
  int dim = 0;
  int depth = 1;
  int memory_lag = 1;
  int forward_step = 1;
  Matrix theta;  // dim x dim*depth
};

/// Ordinary least squares via normal equations with a fixed 1e-10 Tikhonov
/// term; no intercept (the pipeline normalizes the data).
ArModel fit_ar(const Matrix& data, int depth, int forward_step, int memory_lag);

/// Iterated rollout. No boundedness guarantee; throws with the step index if
/// the trajectory leaves the finite range. `warmup` is a raw-resolution
/// trajectory whose tail provides the lagged states.
Matrix predict_ar(const ArModel& model, const Matrix& warmup, int horizon);

}  // namespace mspa
