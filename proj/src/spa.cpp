#include "mspa/spa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace mspa {

IndexPairs consecutive_pairs(int t_len, int forward) {
  IndexPairs pairs;
  for (int t = 0; t + forward < t_len; ++t) pairs.emplace_back(t, t + forward);
  return pairs;
}

namespace {

// In-place per-column simplex projection with a reused sort buffer; the
// dense solvers project tens of thousands of small columns per iteration.
void project_columns(Matrix& m, std::vector<double>& buf) {
  const Eigen::Index k = m.rows();
  buf.resize(std::size_t(k));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < k; ++i) buf[std::size_t(i)] = m(i, j);
    std::sort(buf.begin(), buf.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = buf[0] - 1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      cumsum += buf[std::size_t(i)];
      const double t = (cumsum - 1.0) / double(i + 1);
      if (buf[std::size_t(i)] - t > 0.0) {
        theta = t;
      } else {
        break;
      }
    }
    for (Eigen::Index i = 0; i < k; ++i) m(i, j) = std::max(m(i, j) - theta, 0.0);
  }
}

// In-place simplex projection of a dense column.
void project_in_place(double* v, Eigen::Index k, std::vector<double>& buf) {
  buf.assign(v, v + k);
  std::sort(buf.begin(), buf.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = buf[0] - 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    cumsum += buf[std::size_t(i)];
    const double t = (cumsum - 1.0) / double(i + 1);
    if (buf[std::size_t(i)] - t > 0.0) {
      theta = t;
    } else {
      break;
    }
  }
  for (Eigen::Index i = 0; i < k; ++i) v[i] = std::max(v[i] - theta, 0.0);
}

// Gamma step of SPA I: per-column simplex-constrained least squares, each
// column advanced by a warm-started monotone accelerated projected gradient
// with step 1/L, L estimated by power iteration on A^T A. Columns are
// independent subproblems with their own stopping, so converged columns cost
// nothing on later sweeps.
Matrix fit_simplex_columns(const Matrix& a, const Matrix& x, Matrix g,
                           double step_tol, int max_iter) {
  const Matrix q = a.transpose() * a;
  const Matrix b = a.transpose() * x;
  const double lip = std::max(1e-300, 1.01 * sym_largest_eigenvalue(q));
  const Eigen::Index k = q.rows();

  std::vector<double> buf;
  Vector gc(k), gp(k), y(k), z(k), tmp(k);
  for (Eigen::Index col = 0; col < g.cols(); ++col) {
    gc = g.col(col);
    project_in_place(gc.data(), k, buf);
    const auto f = [&](const Vector& v) {
      tmp.noalias() = q * v;
      return 0.5 * v.dot(tmp) - b.col(col).dot(v);
    };
    double fg = f(gc);
    y = gc;
    double t = 1.0;
    for (int it = 0; it < max_iter; ++it) {
      tmp.noalias() = q * y;
      z = y - (tmp - b.col(col)) / lip;
      project_in_place(z.data(), k, buf);
      const double fz = f(z);
      const bool accepted = fz <= fg;
      gp = gc;
      if (accepted) {
        gc = z;
        fg = fz;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = gc + (t / t_next) * (z - gc) + ((t - 1.0) / t_next) * (gc - gp);
      t = t_next;
      if (!accepted) {
        y = gc;
        t = 1.0;
      }
      if (accepted && it > 0 && (gc - gp).cwiseAbs().maxCoeff() < step_tol) break;
    }
    g.col(col) = gc;
  }
  return g;
}

// Sigma step: closed-form least squares with a Tikhonov term added only when
// Gamma*Gamma^T is rank-deficient. Keeps the previous vertices if the update
// would increase the residual.
Matrix sigma_step(const Matrix& x, const Matrix& gamma, const Matrix& sigma_old) {
  Matrix g = gamma * gamma.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const double max_eig = es.eigenvalues().cwiseAbs().maxCoeff();
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, max_eig)) {
    g.diagonal().array() += 1e-10;
  }
  const Matrix rhs = gamma * x.transpose();   // G * Sigma^T = Gamma * X^T
  Matrix sigma = g.ldlt().solve(rhs).transpose();
  const double res_new = (x - sigma * gamma).norm();
  const double res_old = (x - sigma_old * gamma).norm();
  return res_new <= res_old ? sigma : sigma_old;
}

Matrix draw_initial_vertices(const Matrix& x, int k, std::mt19937_64& rng) {
  const int t_len = int(x.cols());
  Matrix sigma(x.rows(), k);
  if (t_len >= k) {
    // k distinct data columns, uniform without replacement
    std::vector<int> idx(t_len);
    std::iota(idx.begin(), idx.end(), 0);
    for (int j = 0; j < k; ++j) {
      std::uniform_int_distribution<int> pick(j, t_len - 1);
      std::swap(idx[j], idx[pick(rng)]);
      sigma.col(j) = x.col(idx[j]);
    }
  } else {
    for (int j = 0; j < k; ++j) {
      if (j < t_len) {
        sigma.col(j) = x.col(j);
      } else {
        std::uniform_int_distribution<int> pick(0, t_len - 1);
        sigma.col(j) = x.col(pick(rng));
      }
    }
  }
  return sigma;
}

}  // namespace

SpaSolution solve_spa1(const Matrix& data, int k, const SpaConfig& cfg) {
  if (k < 1) throw std::invalid_argument("solve_spa1: k must be >= 1");
  if (data.cols() < 1) throw std::invalid_argument("solve_spa1: empty data");
  if (!data.allFinite()) throw std::invalid_argument("solve_spa1: data contains non-finite values");

  constexpr double kInnerStepTol = 1e-9;
  constexpr int kInnerMaxIter = 500;

  std::mt19937_64 rng(cfg.seed);
  const int restarts = std::max(1, cfg.restarts);
  SpaSolution best;
  best.objective = std::numeric_limits<double>::infinity();

  for (int r = 0; r < restarts; ++r) {
    Matrix sigma = draw_initial_vertices(data, k, rng);
    Matrix gamma = Matrix::Constant(k, data.cols(), 1.0 / double(k));
    double objective = (data - sigma * gamma).norm();
    std::vector<double> history;
    int iterations = 0;
    for (int it = 1; it <= cfg.max_iter; ++it) {
      gamma = fit_simplex_columns(sigma, data, std::move(gamma), kInnerStepTol,
                                  kInnerMaxIter);
      sigma = sigma_step(data, gamma, sigma);
      const double next = (data - sigma * gamma).norm();
      history.push_back(next);
      iterations = it;
      const double decrease = objective - next;
      objective = next;
      if (decrease < cfg.tol * std::max(objective, 1e-300)) break;
    }
    if (objective < best.objective) {
      best.sigma = std::move(sigma);
      best.gamma = std::move(gamma);
      best.objective = objective;
      best.iterations = iterations;
      best.objective_history = std::move(history);
    }
  }
  best.restarts_used = restarts;
  return best;
}

StochasticFit fit_column_stochastic(const Matrix& targets, const Matrix& features,
                                    Matrix init, double tol, int max_iter) {
  if (targets.cols() != features.cols()) {
    throw std::invalid_argument("fit_column_stochastic: sample count mismatch");
  }
  if (init.rows() != targets.rows() || init.cols() != features.rows()) {
    throw std::invalid_argument("fit_column_stochastic: init has wrong shape");
  }

  const Matrix gram = features * features.transpose();
  const Matrix b = targets * features.transpose();
  const double lip = 1.01 * sym_largest_eigenvalue(gram);

  std::vector<double> buf;
  project_columns(init, buf);
  if (lip <= 1e-300) return {std::move(init), targets.norm(), 0};

  const auto f = [&](const Matrix& m) {
    return 0.5 * (m * gram).cwiseProduct(m).sum() - b.cwiseProduct(m).sum();
  };

  Matrix lam = std::move(init);
  double fl = f(lam);
  Matrix y = lam;
  double t = 1.0;
  int iterations = 0;
  int stalled = 0;
  for (int it = 1; it <= max_iter; ++it) {
    Matrix z = y - (y * gram - b) / lip;
    project_columns(z, buf);
    const double fz = f(z);
    const bool accepted = fz <= fl;
    Matrix lam_next = accepted ? z : lam;
    const double f_next = accepted ? fz : fl;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = lam_next + (t / t_next) * (z - lam_next) +
        ((t - 1.0) / t_next) * (lam_next - lam);
    const double decrease = fl - f_next;
    lam = std::move(lam_next);
    fl = f_next;
    t = t_next;
    iterations = it;
    if (!accepted) {
      y = lam;
      t = 1.0;
    }
    stalled = decrease < tol * std::max(std::abs(fl), 1e-300) ? stalled + 1 : 0;
    if (stalled >= 10) break;
  }
  const double residual = (targets - lam * features).norm();
  return {std::move(lam), residual, iterations};
}

StochasticFit solve_spa2(const Matrix& gamma, const IndexPairs& pairs,
                         const SpaConfig& cfg) {
  if (pairs.empty()) throw std::invalid_argument("solve_spa2: empty pair list");
  const int k = int(gamma.rows());
  Matrix features(k, pairs.size());
  Matrix targets(k, pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const auto [in, out] = pairs[j];
    if (in < 0 || out < 0 || in >= gamma.cols() || out >= gamma.cols()) {
      throw std::invalid_argument("solve_spa2: pair index out of range");
    }
    features.col(Eigen::Index(j)) = gamma.col(in);
    targets.col(Eigen::Index(j)) = gamma.col(out);
  }
  return fit_column_stochastic(targets, features, Matrix::Identity(k, k),
                               cfg.tol, cfg.max_iter);
}

bool affinely_independent(const Matrix& sigma) {
  const int k = int(sigma.cols());
  if (k <= 1) return k == 1;
  Matrix centered = sigma.colwise() - sigma.rowwise().mean().eval();
  Eigen::JacobiSVD<Matrix> svd(centered);
  if (svd.singularValues().size() < k - 1) return false;
  return svd.singularValues()[k - 2] > 1e-10;
}

Vector rho_small_k(const Matrix& sigma, const Vector& x) {
  if (sigma.cols() > sigma.rows()) {
    throw std::invalid_argument("rho_small_k: requires K <= D");
  }
  if (sigma.rows() != x.size()) {
    throw std::invalid_argument("rho_small_k: dimension mismatch");
  }
  if (!affinely_independent(sigma)) {
    throw std::invalid_argument("rho_small_k: degenerate polytope (affinely dependent vertices)");
  }
  return simplex_least_squares(sigma, x);
}

Vector rho_large_k(const Matrix& sigma, const Vector& x, const Vector& reference) {
  if (sigma.cols() <= sigma.rows()) {
    throw std::invalid_argument("rho_large_k: requires K > D");
  }
  if (sigma.rows() != x.size() || sigma.cols() != reference.size()) {
    throw std::invalid_argument("rho_large_k: dimension mismatch");
  }
  return simplex_least_squares_pg(sigma, x, reference);
}

}  // namespace mspa
