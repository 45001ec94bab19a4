#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mspa/systems.hpp"

using namespace mspa;

TEST_CASE("lorenz96 equilibrium at the constant forcing state") {
  const Vector x = Vector::Constant(6, 3.8);
  CHECK(lorenz96_rhs(x, 3.8).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK(lorenz96_rhs(Vector::Zero(5), 0.0).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("lorenz96 matches a scalar evaluation of the coupling") {
  Vector x(5);
  x << 3.8, 3.8, 3.8, 3.8, 3.8001;
  const double f = 3.8;
  const Vector dx = lorenz96_rhs(x, f);
  // Independent per-component evaluation with explicit wrapped indices.
  CHECK(dx[0] == doctest::Approx((x[1] - x[3]) * x[4] - x[0] + f));
  CHECK(dx[1] == doctest::Approx((x[2] - x[4]) * x[0] - x[1] + f));
  CHECK(dx[2] == doctest::Approx((x[3] - x[0]) * x[1] - x[2] + f));
  CHECK(dx[3] == doctest::Approx((x[4] - x[1]) * x[2] - x[3] + f));
  CHECK(dx[4] == doctest::Approx((x[0] - x[2]) * x[3] - x[4] + f));
}

TEST_CASE("lorenz96 rejects dimensions below four") {
  CHECK_THROWS_AS(lorenz96_rhs(Vector::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("chua right-hand side") {
  const ChuaParams p;
  CHECK(chua_rhs(Vector::Zero(3), p).cwiseAbs().maxCoeff() == doctest::Approx(0.0));

  Vector x(3);
  x << 1.0, 0.0, 0.0;
  Vector dx = chua_rhs(x, p);
  CHECK(dx[0] == doctest::Approx(0.2 - 0.01 / 3.0));
  CHECK(dx[1] == doctest::Approx(1.0));
  CHECK(dx[2] == doctest::Approx(0.0));

  x << 0.0, 1.0, 0.0;
  dx = chua_rhs(x, p);
  CHECK(dx[0] == doctest::Approx(18.0));
  CHECK(dx[1] == doctest::Approx(-1.0));
  CHECK(dx[2] == doctest::Approx(-33.0));
}

TEST_CASE("RK4 keeps equilibria constant") {
  const double f = 2.5;
  const Vector x0 = Vector::Constant(5, f);
  const Matrix traj = integrate_rk4(
      [f](const Vector& x) { return lorenz96_rhs(x, f); }, x0, 0.01, 50);
  CHECK((traj.col(50) - x0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("RK4 integrates exponential decay to fourth order") {
  const auto rhs = [](const Vector& x) { return Vector(-x); };
  Vector x0(1);
  x0 << 1.0;
  const Matrix coarse = integrate_rk4(rhs, x0, 0.01, 100);
  CHECK(std::abs(coarse(0, 100) - std::exp(-1.0)) <= 1e-9);

  const Matrix fine = integrate_rk4(rhs, x0, 0.005, 200);
  const double err_coarse = std::abs(coarse(0, 100) - std::exp(-1.0));
  const double err_fine = std::abs(fine(0, 200) - std::exp(-1.0));
  CHECK(err_coarse / err_fine >= 8.0);
}

TEST_CASE("RK4 reports the step of a divergence") {
  const auto rhs = [](const Vector& x) { return Vector(x.array().square().matrix() * 1e8); };
  Vector x0(1);
  x0 << 10.0;
  CHECK_THROWS_AS(integrate_rk4(rhs, x0, 1.0, 100), std::runtime_error);
}

TEST_CASE("chaotic Lorenz-96 has a positive maximal Lyapunov exponent") {
  const double f = 5.0;
  Vector x0 = Vector::Constant(10, f);
  x0[9] += 1e-4;
  // Walk onto the attractor first.
  const Matrix transient = integrate_rk4(
      [f](const Vector& x) { return lorenz96_rhs(x, f); }, x0, 0.01, 30000);
  const double lyap = max_lyapunov(
      [f](const Vector& x) { return lorenz96_rhs(x, f); }, transient.col(30000), 0.01, 100000);
  CHECK(lyap > 0.02);

  // Contrast: the F = 3.8 regime is periodic, its exponent is not positive.
  Vector y0(5);
  y0 << 3.8, 3.8, 3.8, 3.8, 3.8001;
  const Matrix tr5 = integrate_rk4(
      [](const Vector& x) { return lorenz96_rhs(x, 3.8); }, y0, 0.01, 30000);
  const double lyap5 = max_lyapunov(
      [](const Vector& x) { return lorenz96_rhs(x, 3.8); }, tr5.col(30000), 0.01, 100000);
  CHECK(lyap5 < 0.02);
}

TEST_CASE("KS integrator keeps the zero profile at zero") {
  KsSpec spec;
  spec.steps = 50;
  spec.initial = Vector::Zero(spec.grid_points);
  const Matrix traj = integrate_ks_etdrk4(spec);
  CHECK(traj.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("KS integrator reproduces the linear dispersion of a low mode") {
  KsSpec spec;
  spec.steps = 250;
  spec.initial.resize(spec.grid_points);
  for (int j = 0; j < spec.grid_points; ++j) {
    const double x = 2.0 * std::numbers::pi * j / spec.grid_points;
    spec.initial[j] = 1e-8 * std::cos(x);
  }
  const Matrix traj = integrate_ks_etdrk4(spec);
  // Mode k=1 amplitude via direct Fourier sums at t=0 and t=0.25.
  const auto mode_amp = [&](const Vector& u) {
    double re = 0.0, im = 0.0;
    for (int j = 0; j < spec.grid_points; ++j) {
      const double x = 2.0 * std::numbers::pi * j / spec.grid_points;
      re += u[j] * std::cos(x);
      im -= u[j] * std::sin(x);
    }
    return std::sqrt(re * re + im * im);
  };
  const double growth = mode_amp(traj.col(spec.steps)) / mode_amp(traj.col(0));
  const double expected = std::exp((16.0 - 4.0) * 0.25);
  CHECK(std::abs(growth - expected) / expected <= 0.01);
}

TEST_CASE("KS reference setup reaches a statistically steady travelling wave") {
  KsSpec spec;
  spec.steps = 6500;
  const Matrix traj = integrate_ks_etdrk4(spec);
  const Matrix retained = traj.rightCols(4000);
  CHECK(retained.allFinite());
  // No secular amplitude growth across the retained window.
  const double first = retained.leftCols(2000).cwiseAbs().mean();
  const double second = retained.rightCols(2000).cwiseAbs().mean();
  CHECK(second / first > 0.8);
  CHECK(second / first < 1.25);
  // The pattern travels: the final profile is far from constant.
  CHECK(retained.col(3999).maxCoeff() - retained.col(3999).minCoeff() > 1.0);
}

namespace {

// One ETDRK4 step through a naive full-complex DFT, written independently of
// the integrator's half-spectrum path.
Vector naive_etdrk4_step(const Vector& u0, double h) {
  using C = std::complex<double>;
  const int n = int(u0.size());
  const C i_unit(0.0, 1.0);
  const auto dft = [&](const Eigen::VectorXcd& u, double sign) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        v[k] += u[j] * std::exp(sign * i_unit * (2.0 * std::numbers::pi * k * j / double(n)));
      }
    }
    return v;
  };
  const auto phi = [&](double z, int which) {
    C acc(0.0, 0.0);
    for (int m = 0; m < 64; ++m) {
      const C zz = C(z, 0.0) + std::exp(i_unit * (std::numbers::pi * (2.0 * m + 1.0) / 64.0));
      const C ez = std::exp(zz);
      switch (which) {
        case 0: acc += (ez - 1.0) / zz; break;
        case 1: acc += (-4.0 - zz + ez * (4.0 - 3.0 * zz + zz * zz)) / (zz * zz * zz); break;
        case 2: acc += (2.0 + zz + ez * (-2.0 + zz)) / (zz * zz * zz); break;
        default: acc += (-4.0 - 3.0 * zz - zz * zz + ez * (4.0 - zz)) / (zz * zz * zz); break;
      }
    }
    return (acc / 64.0).real();
  };
  Eigen::VectorXcd wave(n);
  for (int j = 0; j < n; ++j) wave[j] = j <= n / 2 ? double(j) : double(j - n);
  const int cutoff = n / 3;
  const auto nl = [&](const Eigen::VectorXcd& v) {
    const Eigen::VectorXcd u = dft(v, +1.0) / double(n);
    Eigen::VectorXcd w = dft(u.cwiseProduct(u), -1.0);
    for (int j = 0; j < n; ++j) {
      const double k = wave[j].real();
      w[j] *= (std::abs(k) <= cutoff && 2 * j != n) ? C(0.0, -8.0 * k) : C(0.0, 0.0);
    }
    return w;
  };
  Eigen::VectorXcd v = dft(u0.cast<C>(), -1.0);
  Eigen::VectorXcd e1(n), e2(n), q(n), f1(n), f2(n), f3(n);
  for (int j = 0; j < n; ++j) {
    const double k = wave[j].real();
    const double lz = (16.0 * k * k - 4.0 * k * k * k * k) * h;
    e1[j] = std::exp(lz);
    e2[j] = std::exp(0.5 * lz);
    q[j] = h * phi(0.5 * lz, 0);
    f1[j] = h * phi(lz, 1);
    f2[j] = h * phi(lz, 2);
    f3[j] = h * phi(lz, 3);
  }
  const Eigen::VectorXcd nv = nl(v);
  const Eigen::VectorXcd a = e2.cwiseProduct(v) + q.cwiseProduct(nv);
  const Eigen::VectorXcd na = nl(a);
  const Eigen::VectorXcd b = e2.cwiseProduct(v) + q.cwiseProduct(na);
  const Eigen::VectorXcd nb = nl(b);
  const Eigen::VectorXcd c = e2.cwiseProduct(a) + q.cwiseProduct(2.0 * nb - nv);
  const Eigen::VectorXcd nc = nl(c);
  const Eigen::VectorXcd vn = e1.cwiseProduct(v) + f1.cwiseProduct(nv) +
                              f2.cwiseProduct(2.0 * (na + nb)) + f3.cwiseProduct(nc);
  const Eigen::VectorXcd un = dft(vn, +1.0) / double(n);
  double imag_residue = 0.0;
  Vector out(n);
  for (int j = 0; j < n; ++j) {
    out[j] = un[j].real();
    imag_residue = std::max(imag_residue, std::abs(un[j].imag()));
  }
  REQUIRE(imag_residue < 1e-10);  // the step conserves reality of the field
  return out;
}

}  // namespace

TEST_CASE("KS step agrees with a full-complex reference and stays real") {
  KsSpec warm;
  warm.steps = 3000;
  const Matrix traj = integrate_ks_etdrk4(warm);
  const Vector state = traj.col(3000);

  KsSpec one;
  one.steps = 1;
  one.initial = state;
  const Matrix advanced = integrate_ks_etdrk4(one);
  const Vector reference = naive_etdrk4_step(state, one.step);
  CHECK((advanced.col(1) - reference).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("observable selection") {
  Matrix data(5, 4);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 4; ++c) data(r, c) = 10.0 * r + c;
  const Matrix all = select_observable(data, {0, 1, 2, 3, 4});
  CHECK((all - data).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  const Matrix two = select_observable(data, {0, 3});
  CHECK(two.rows() == 2);
  CHECK(two(1, 2) == doctest::Approx(32.0));
  CHECK_THROWS_AS(select_observable(data, {}), std::invalid_argument);
  CHECK_THROWS_AS(select_observable(data, {5}), std::invalid_argument);
}
