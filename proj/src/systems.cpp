#include "mspa/systems.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mspa {

Vector lorenz96_rhs(const Vector& x, double f) {
  const int d = int(x.size());
  if (d < 4) throw std::invalid_argument("lorenz96_rhs: dimension must be >= 4");
  Vector dx(d);
  for (int k = 0; k < d; ++k) {
    const int kp1 = (k + 1) % d;
    const int km1 = (k - 1 + d) % d;
    const int km2 = (k - 2 + d) % d;
    dx[k] = (x[kp1] - x[km2]) * x[km1] - x[k] + f;
  }
  return dx;
}

Vector chua_rhs(const Vector& x, const ChuaParams& p) {
  if (x.size() != 3) throw std::invalid_argument("chua_rhs: state must be 3-dimensional");
  Vector dx(3);
  dx[0] = p.alpha * x[1] - p.mu0 * x[0] - (p.mu1 / 3.0) * x[0] * x[0] * x[0];
  dx[1] = x[0] - x[1] + x[2];
  dx[2] = -p.beta * x[1];
  return dx;
}

Matrix integrate_rk4(const OdeRhs& rhs, const Vector& x0, double h, int steps) {
  if (h <= 0.0) throw std::invalid_argument("integrate_rk4: step size must be positive");
  if (steps < 0) throw std::invalid_argument("integrate_rk4: negative step count");
  Matrix out(x0.size(), steps + 1);
  out.col(0) = x0;
  Vector x = x0;
  for (int n = 1; n <= steps; ++n) {
    const Vector k1 = rhs(x);
    const Vector k2 = rhs(x + 0.5 * h * k1);
    const Vector k3 = rhs(x + 0.5 * h * k2);
    const Vector k4 = rhs(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw std::runtime_error("integrate_rk4: divergence at step " + std::to_string(n));
    }
    out.col(n) = x;
  }
  return out;
}

Vector KsSpec::default_profile(int n) {
  Vector u(n);
  for (int j = 0; j < n; ++j) {
    const double x = 2.0 * std::numbers::pi * double(j) / double(n);
    u[j] = 0.0001 * std::cos(x) * (1.0 + std::sin(x));
  }
  return u;
}

namespace {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;

// Real half-spectrum FFT wrapper around FFTW (n/2+1 modes); conjugate
// symmetry of the field is enforced structurally. Plans use FFTW_ESTIMATE
// for reproducibility.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n), modes_(n / 2 + 1) {
    real_ = fftw_alloc_real(n);
    spec_ = fftw_alloc_complex(modes_);
    fwd_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(spec_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int modes() const { return modes_; }

  CVector forward(const Vector& u) {
    for (int j = 0; j < n_; ++j) real_[j] = u[j];
    fftw_execute(fwd_);
    CVector v(modes_);
    for (int j = 0; j < modes_; ++j) v[j] = Complex(spec_[j][0], spec_[j][1]);
    return v;
  }

  Vector inverse(const CVector& v) {
    for (int j = 0; j < modes_; ++j) {
      spec_[j][0] = v[j].real();
      spec_[j][1] = v[j].imag();
    }
    fftw_execute(bwd_);
    Vector u(n_);
    for (int j = 0; j < n_; ++j) u[j] = real_[j] / double(n_);
    return u;
  }

 private:
  int n_;
  int modes_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

// Mean of phi(z + r_j) over 32 points r_j on the unit circle; evaluates the
// ETDRK4 coefficient functions without cancellation near z = 0.
template <typename Phi>
double contour_mean(double z, Phi phi) {
  constexpr int kPoints = 32;
  Complex acc(0.0, 0.0);
  for (int j = 0; j < kPoints; ++j) {
    const double angle = std::numbers::pi * (2.0 * j + 1.0) / kPoints;
    acc += phi(Complex(z, 0.0) + std::polar(1.0, angle));
  }
  return (acc / double(kPoints)).real();
}

}  // namespace

Matrix integrate_ks_etdrk4(const KsSpec& spec) {
  const int n = spec.grid_points;
  if (n < 4) throw std::invalid_argument("integrate_ks_etdrk4: grid too small");
  if (spec.step <= 0.0) throw std::invalid_argument("integrate_ks_etdrk4: step must be positive");
  if (spec.steps < 0) throw std::invalid_argument("integrate_ks_etdrk4: negative step count");
  Vector u0 = spec.initial.size() == 0 ? KsSpec::default_profile(n) : spec.initial;
  if (u0.size() != n) throw std::invalid_argument("integrate_ks_etdrk4: initial profile size mismatch");

  RealFft fft(n);
  const int modes = fft.modes();
  const double h = spec.step;

  // Linear symbol and ETDRK4 coefficients per retained mode.
  Vector e1(modes), e2(modes), q(modes), f1(modes), f2(modes), f3(modes);
  for (int j = 0; j < modes; ++j) {
    const double k = double(j);
    const double lz = (16.0 * k * k - 4.0 * k * k * k * k) * h;
    e1[j] = std::exp(lz);
    e2[j] = std::exp(0.5 * lz);
    q[j] = h * contour_mean(0.5 * lz, [](Complex z) { return (std::exp(z) - 1.0) / z; });
    f1[j] = h * contour_mean(lz, [](Complex z) {
      return (-4.0 - z + std::exp(z) * (4.0 - 3.0 * z + z * z)) / (z * z * z);
    });
    f2[j] = h * contour_mean(lz, [](Complex z) {
      return (2.0 + z + std::exp(z) * (-2.0 + z)) / (z * z * z);
    });
    f3[j] = h * contour_mean(lz, [](Complex z) {
      return (-4.0 - 3.0 * z - z * z + std::exp(z) * (4.0 - z)) / (z * z * z);
    });
  }

  // Spectral multiplier of the nonlinear term -8 (u^2)_x with 2/3-rule
  // dealiasing; the Nyquist derivative is set to zero.
  CVector nl_mult(modes);
  const int cutoff = n / 3;
  for (int j = 0; j < modes; ++j) {
    const bool keep = j <= cutoff && 2 * j != n;
    nl_mult[j] = keep ? Complex(0.0, -8.0 * j) : Complex(0.0, 0.0);
  }

  const auto nonlinear = [&](const CVector& v) {
    const Vector u = fft.inverse(v);
    const CVector wh = fft.forward(u.cwiseProduct(u));
    return CVector(nl_mult.cwiseProduct(wh));
  };

  const CVector e1c = e1.cast<Complex>();
  const CVector e2c = e2.cast<Complex>();
  const CVector qc = q.cast<Complex>();
  const CVector f1c = f1.cast<Complex>();
  const CVector f2c = f2.cast<Complex>();
  const CVector f3c = f3.cast<Complex>();

  Matrix out(n, spec.steps + 1);
  out.col(0) = u0;
  CVector v = fft.forward(u0);
  for (int step = 1; step <= spec.steps; ++step) {
    const CVector nv = nonlinear(v);
    const CVector a = e2c.cwiseProduct(v) + qc.cwiseProduct(nv);
    const CVector na = nonlinear(a);
    const CVector b = e2c.cwiseProduct(v) + qc.cwiseProduct(na);
    const CVector nb = nonlinear(b);
    const CVector c = e2c.cwiseProduct(a) + qc.cwiseProduct(2.0 * nb - nv);
    const CVector nc = nonlinear(c);
    v = e1c.cwiseProduct(v) + f1c.cwiseProduct(nv) +
        f2c.cwiseProduct(2.0 * (na + nb)) + f3c.cwiseProduct(nc);

    out.col(step) = fft.inverse(v);
    if (!out.col(step).allFinite()) {
      throw std::runtime_error("integrate_ks_etdrk4: divergence at step " + std::to_string(step));
    }
  }
  return out;
}

Matrix select_observable(const Matrix& data, const std::vector<int>& coords) {
  if (coords.empty()) throw std::invalid_argument("select_observable: empty coordinate list");
  Matrix out(coords.size(), data.cols());
  for (std::size_t r = 0; r < coords.size(); ++r) {
    if (coords[r] < 0 || coords[r] >= data.rows()) {
      throw std::invalid_argument("select_observable: coordinate out of range");
    }
    out.row(Eigen::Index(r)) = data.row(coords[r]);
  }
  return out;
}

double max_lyapunov(const OdeRhs& rhs, const Vector& x0, double h, int steps,
                    int renorm_every, double offset) {
  if (renorm_every < 1 || steps < renorm_every) {
    throw std::invalid_argument("max_lyapunov: need at least one renormalization window");
  }
  Vector x = x0;
  Vector y = x0;
  y[0] += offset;
  double sum_log = 0.0;
  int windows = 0;
  const auto rk4_step = [&](Vector& s) {
    const Vector k1 = rhs(s);
    const Vector k2 = rhs(s + 0.5 * h * k1);
    const Vector k3 = rhs(s + 0.5 * h * k2);
    const Vector k4 = rhs(s + h * k3);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  };
  for (int n = 1; n <= steps; ++n) {
    rk4_step(x);
    rk4_step(y);
    if (n % renorm_every == 0) {
      const double d = (y - x).norm();
      if (d <= 0.0 || !std::isfinite(d)) {
        throw std::runtime_error("max_lyapunov: separation collapsed or diverged");
      }
      sum_log += std::log(d / offset);
      y = x + (y - x) * (offset / d);
      ++windows;
    }
  }
  return sum_log / (double(windows) * double(renorm_every) * h);
}

}  // namespace mspa
