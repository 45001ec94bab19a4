#include "mspa/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace mspa {

bool is_stochastic_vector(const Vector& v, double tol) {
  if (v.size() == 0) return false;
  if ((v.array() < 0.0).any()) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

bool is_column_stochastic(const Matrix& m, double tol) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (!is_stochastic_vector(m.col(j), tol)) return false;
  }
  return m.cols() > 0;
}

Vector renormalize_stochastic(Vector v) {
  v = v.cwiseMax(0.0).cwiseMin(1.0);
  const double s = v.sum();
  if (s <= 0.0) return Vector::Constant(v.size(), 1.0 / double(v.size()));
  return v / s;
}

Vector project_to_unit_simplex(const Vector& v) {
  const Eigen::Index n = v.size();
  if (n == 0) throw std::invalid_argument("project_to_unit_simplex: empty vector");
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = u[0] - 1.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / double(j + 1);
    if (u[j] - t > 0.0) {
      theta = t;
    } else {
      break;
    }
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Vector barycentric_to_point(const Matrix& sigma, const Vector& gamma) {
  if (sigma.cols() != gamma.size()) {
    throw std::invalid_argument("barycentric_to_point: dimension mismatch");
  }
  return sigma * gamma;
}

PowerIterationResult dominant_eigvec_stochastic(const Matrix& lambda,
                                                double tol, int max_iter) {
  if (lambda.rows() == 0 || lambda.rows() != lambda.cols()) {
    throw std::invalid_argument("dominant_eigvec_stochastic: matrix must be square");
  }
  const Eigen::Index k = lambda.rows();
  Vector g = Vector::Constant(k, 1.0 / double(k));
  for (int it = 1; it <= max_iter; ++it) {
    Vector next = renormalize_stochastic(lambda * g);
    if ((lambda * next - next).norm() <= tol) return {next, it};
    g = std::move(next);
  }
  throw std::runtime_error("dominant_eigvec_stochastic: no convergence within max_iter");
}

double sym_largest_eigenvalue(const Matrix& g, int iters) {
  const Eigen::Index n = g.rows();
  if (n == 0) return 0.0;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 1e-3 * double(i);
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = g * v;
    const double nw = w.norm();
    if (nw <= 1e-300) return 0.0;
    v = w / nw;
    if (std::abs(nw - lam) <= 1e-12 * std::max(1.0, nw)) return nw;
    lam = nw;
  }
  return lam;
}

namespace {

// Equality-constrained least squares on the active support: solves the KKT
// system [G_SS 1; 1^T 0] [h; mu] = [b_S; 1].
Vector kkt_solve(const Matrix& g, const Vector& b, const std::vector<int>& support) {
  const int s = int(support.size());
  Matrix kkt = Matrix::Zero(s + 1, s + 1);
  Vector rhs = Vector::Zero(s + 1);
  for (int p = 0; p < s; ++p) {
    for (int q = 0; q < s; ++q) kkt(p, q) = g(support[p], support[q]);
    kkt(p, s) = 1.0;
    kkt(s, p) = 1.0;
    rhs[p] = b[support[p]];
  }
  rhs[s] = 1.0;
  return Eigen::FullPivLU<Matrix>(kkt).solve(rhs).head(s);
}

}  // namespace

Vector simplex_least_squares(const Matrix& a, const Vector& x) {
  if (a.rows() != x.size()) throw std::invalid_argument("simplex_least_squares: dimension mismatch");
  const int k = int(a.cols());
  if (k < 1) throw std::invalid_argument("simplex_least_squares: no columns");
  if (k == 1) return Vector::Ones(1);

  const Matrix g = a.transpose() * a;
  const Vector b = a.transpose() * x;

  // Start at the single best vertex.
  int best = 0;
  double best_val = 0.5 * g(0, 0) - b[0];
  for (int j = 1; j < k; ++j) {
    const double val = 0.5 * g(j, j) - b[j];
    if (val < best_val) {
      best_val = val;
      best = j;
    }
  }
  Vector gamma = Vector::Zero(k);
  gamma[best] = 1.0;
  std::vector<int> support{best};
  std::vector<char> active(k, 0);
  active[best] = 1;

  const int max_outer = 100 + 10 * k;
  for (int outer = 0; outer < max_outer; ++outer) {
    // Restore primal feasibility on the current support.
    for (int inner = 0; inner < max_outer; ++inner) {
      Vector h = kkt_solve(g, b, support);
      double alpha = 1.0;
      int blocking = -1;
      for (int p = 0; p < int(support.size()); ++p) {
        if (h[p] <= 0.0) {
          const double gp = gamma[support[p]];
          const double step = gp / (gp - h[p]);
          if (step < alpha) {
            alpha = step;
            blocking = p;
          }
        }
      }
      if (blocking < 0) {
        for (int p = 0; p < int(support.size()); ++p) gamma[support[p]] = h[p];
        break;
      }
      for (int p = 0; p < int(support.size()); ++p) {
        const int idx = support[p];
        gamma[idx] += alpha * (h[p] - gamma[idx]);
      }
      gamma[support[blocking]] = 0.0;
      active[support[blocking]] = 0;
      support.erase(support.begin() + blocking);
      if (support.empty()) {  // unreachable with a valid simplex
        support.push_back(best);
        active[best] = 1;
        gamma.setZero();
        gamma[best] = 1.0;
        break;
      }
    }

    // Dual feasibility: off-support multipliers w_j + mu must be nonnegative.
    const Vector w = g * gamma - b;
    double mu = 0.0;
    for (int idx : support) mu -= w[idx];
    mu /= double(support.size());
    const double eps = 1e-11 * (1.0 + w.cwiseAbs().maxCoeff());
    int enter = -1;
    double most_negative = -eps;
    for (int j = 0; j < k; ++j) {
      if (active[j]) continue;
      const double viol = w[j] + mu;
      if (viol < most_negative) {
        most_negative = viol;
        enter = j;
      }
    }
    if (enter < 0) return gamma;
    support.push_back(enter);
    active[enter] = 1;
  }
  return gamma;
}

Vector simplex_least_squares_pg(const Matrix& a, const Vector& x,
                                const Vector& g0, double tol, int max_iter) {
  if (a.rows() != x.size() || a.cols() != g0.size()) {
    throw std::invalid_argument("simplex_least_squares_pg: dimension mismatch");
  }
  const Matrix q = a.transpose() * a;
  const Vector b = a.transpose() * x;
  const double lip = std::max(1e-300, 1.01 * sym_largest_eigenvalue(q));

  const auto f = [&](const Vector& v) { return 0.5 * v.dot(q * v) - b.dot(v); };

  Vector g = project_to_unit_simplex(g0);
  double fg = f(g);
  Vector y = g;
  double t = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector z = project_to_unit_simplex(y - (q * y - b) / lip);
    const double fz = f(z);
    Vector g_next;
    double f_next;
    bool accepted = fz <= fg;
    if (accepted) {
      g_next = z;
      f_next = fz;
    } else {
      g_next = g;
      f_next = fg;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = g_next + (t / t_next) * (z - g_next) + ((t - 1.0) / t_next) * (g_next - g);
    const double change = (g_next - g).cwiseAbs().maxCoeff();
    g = std::move(g_next);
    fg = f_next;
    t = t_next;
    if (!accepted) {  // restart the momentum after a rejected step
      y = g;
      t = 1.0;
    }
    if (accepted && it > 0 && change < tol) break;
  }
  return g;
}

}  // namespace mspa
