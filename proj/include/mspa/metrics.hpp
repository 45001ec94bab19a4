#pragma once

#include <vector>

#include "mspa/core.hpp"

namespace mspa {

/// Euclidean distance between two barycentric coordinates.
double barycentric_error(const Vector& g, const Vector& g2);

/// Euclidean distance between two states in the full space.
double true_space_error(const Vector& x, const Vector& x2);

/// Mean over start indices i of the error between truth and prediction k
/// steps later; with a single valid start index this is the pointwise error.
double avg_k_step_error(const Matrix& truth, const Matrix& predictions, int k);

/// Hausdorff distance between two point sets given as matrix columns.
double hausdorff(const Matrix& a, const Matrix& b);

/// Unnormalized autocorrelation of one coordinate at a given lag, averaged
/// over realisations and times; the mean is taken across all realisations.
double autocorrelation(const std::vector<Matrix>& realizations, int coord, int lag);

/// Mean over time of ||x_t - sigma*gamma_t|| / ||x_t||; columns with zero
/// norm contribute their absolute error.
double projection_loss(const Matrix& data, const Matrix& sigma, const Matrix& gamma);

}  // namespace mspa
