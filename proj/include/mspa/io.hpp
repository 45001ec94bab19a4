#pragma once

#include <string>

#include "mspa/core.hpp"

namespace mspa {

/// Trajectory CSV: header "c1,...,cD", one row per time step. In memory the
/// trajectory is the transpose, D x T with one column per time step.
/// Values are written as shortest round-trip decimals.
void write_trajectory_csv(const std::string& path, const Matrix& data);
Matrix read_trajectory_csv(const std::string& path);

/// Shortest decimal representation that parses back to the same double.
std::string format_shortest(double value);

}  // namespace mspa
