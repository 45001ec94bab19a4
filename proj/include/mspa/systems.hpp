#pragma once

#include <functional>
#include <vector>

#include "mspa/core.hpp"

namespace mspa {

using OdeRhs = std::function<Vector(const Vector&)>;

/// Cyclic coupled right-hand side dx_k = (x_{k+1} - x_{k-2}) x_{k-1} - x_k + f.
/// Requires dimension >= 4 so the wrapped indices stay distinct.
Vector lorenz96_rhs(const Vector& x, double f);

struct ChuaParams {
  double alpha = 18.0;
  double beta = 33.0;
  double mu0 = -0.2;
  double mu1 = 0.01;
};

Vector chua_rhs(const Vector& x, const ChuaParams& p);

/// Classical fixed-step fourth-order Runge-Kutta. Returns a
/// D x (steps+1) trajectory including the initial state; throws with the
/// step index if the integration produces non-finite values.
Matrix integrate_rk4(const OdeRhs& rhs, const Vector& x0, double h, int steps);

struct KsSpec {
  int grid_points = 100;     // equidistant points on [0, 2*pi)
  double step = 0.001;
  int steps = 0;
  Vector initial;            // defaults to default_profile(grid_points)

  static Vector default_profile(int n);  // 0.0001*cos(x)*(1+sin(x))
};

/// Spectral ETDRK4 integrator for u_t + 4u_xxxx + 16u_xx + 8(u^2)_x = 0 on
/// [0, 2*pi) periodic. Returns N x (steps+1) real grid values.
Matrix integrate_ks_etdrk4(const KsSpec& spec);

/// Row selection (0-based coordinate indices).
Matrix select_observable(const Matrix& data, const std::vector<int>& coords);

/// Maximal Lyapunov exponent estimate: two-trajectory separation with
/// renormalization every `renorm_every` steps from an initial offset of
/// `offset` on the first coordinate.
double max_lyapunov(const OdeRhs& rhs, const Vector& x0, double h, int steps,
                    int renorm_every = 100, double offset = 1e-8);

}  // namespace mspa
