#include "mspa/pipeline.hpp"

#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace mspa {

Normalization Normalization::fit(const Matrix& data) {
  if (data.cols() == 0) throw std::invalid_argument("Normalization: empty data");
  return {data.rowwise().minCoeff(), data.rowwise().maxCoeff()};
}

Vector Normalization::forward(const Vector& x) const {
  Vector y(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double range = hi[d] - lo[d];
    y[d] = range > 0.0 ? 2.0 * (x[d] - lo[d]) / range - 1.0 : 0.0;
  }
  return y;
}

Matrix Normalization::forward(const Matrix& x) const {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index t = 0; t < x.cols(); ++t) y.col(t) = forward(Vector(x.col(t)));
  return y;
}

Vector Normalization::inverse(const Vector& y) const {
  Vector x(y.size());
  for (Eigen::Index d = 0; d < y.size(); ++d) {
    const double range = hi[d] - lo[d];
    x[d] = range > 0.0 ? lo[d] + 0.5 * (y[d] + 1.0) * range : lo[d];
  }
  return x;
}

Matrix Normalization::inverse(const Matrix& y) const {
  Matrix x(y.rows(), y.cols());
  for (Eigen::Index t = 0; t < y.cols(); ++t) x.col(t) = inverse(Vector(y.col(t)));
  return x;
}

Matrix project_trajectory(const Matrix& sigma, const Matrix& states) {
  const int k = int(sigma.cols());
  Matrix gamma(k, states.cols());
  if (k <= sigma.rows()) {
    for (Eigen::Index t = 0; t < states.cols(); ++t) {
      gamma.col(t) = rho_small_k(sigma, states.col(t));
    }
  } else {
    Vector reference = Vector::Constant(k, 1.0 / double(k));
    for (Eigen::Index t = 0; t < states.cols(); ++t) {
      reference = rho_large_k(sigma, states.col(t), reference);
      gamma.col(t) = reference;
    }
  }
  return gamma;
}

namespace {

// Path affiliation from a gamma history at forward-step granularity; `back`
// is the index of the newest entry, lags step q entries into the past.
Vector psi_from_history(const std::deque<Vector>& history, int back, int q,
                        const IndexOrdering& ordering) {
  std::vector<Vector> lags(ordering.depth());
  for (int m = 0; m < ordering.depth(); ++m) lags[m] = history[std::size_t(back - m * q)];
  return path_affiliation(lags, ordering);
}

Matrix lifting_features(const Matrix& gamma, const MemoryConfig& mem,
                        const IndexOrdering& ordering) {
  const int first_t = (mem.depth - 1) * mem.memory_lag;
  const int n = int(gamma.cols()) - first_t;
  if (n < 1) throw std::invalid_argument("train: series too short for lifting features");
  Matrix features(ordering.size(), n);
  std::vector<Vector> lags(mem.depth);
  for (int j = 0; j < n; ++j) {
    const int t = first_t + j;
    for (int m = 0; m < mem.depth; ++m) lags[m] = gamma.col(t - m * mem.memory_lag);
    features.col(j) = path_affiliation(lags, ordering);
  }
  return features;
}

}  // namespace

MspaModel train(const Matrix& data, int k, int k_lift, const MemoryConfig& mem,
                const SpaConfig& cfg, TrainReport* report) {
  mem.validate(k);
  if (k_lift < 1) throw std::invalid_argument("train: k_lift must be >= 1");

  MspaModel model;
  model.mem = mem;
  model.normalization = Normalization::fit(data);
  const Matrix normalized = model.normalization.forward(data);

  SpaSolution learn = solve_spa1(normalized, k, cfg);
  SpaSolution lift = k_lift == k ? learn : solve_spa1(normalized, k_lift, cfg);

  MspaFit propagator = solve_mspa(learn.gamma, mem, cfg);

  const IndexOrdering ordering(k, mem.depth);
  const Matrix features = lifting_features(learn.gamma, mem, ordering);
  const int first_t = (mem.depth - 1) * mem.memory_lag;
  const Matrix targets = lift.gamma.rightCols(lift.gamma.cols() - first_t);
  Matrix init = k_lift == ordering.size()
                    ? Matrix(Matrix::Identity(k_lift, k_lift))
                    : Matrix(Matrix::Constant(k_lift, ordering.size(), 1.0 / double(k_lift)));
  StochasticFit lifting =
      fit_column_stochastic(targets, features, std::move(init), cfg.tol, cfg.max_iter);
  const Vector feature_mass = features.rowwise().sum();
  for (Eigen::Index j = 0; j < lifting.lambda.cols(); ++j) {
    if (feature_mass[j] == 0.0) lifting.lambda.col(j).setConstant(1.0 / double(k_lift));
  }

  if (report) {
    report->spa1_learn = learn.objective;
    report->spa1_lift = lift.objective;
    report->mspa = propagator.residual;
    report->spa2 = propagator.spa2_residual;
    report->lifting = lifting.residual;
  }

  model.sigma_learn = std::move(learn.sigma);
  model.sigma_lift = std::move(lift.sigma);
  model.lambda_hat = std::move(propagator.lambda);
  model.lambda_lift = std::move(lifting.lambda);
  return model;
}

Matrix predict_barycentric(const Matrix& lambda_hat, const MemoryConfig& mem,
                           const Matrix& warmup_gammas, int horizon) {
  const int k = int(lambda_hat.rows());
  mem.validate(k);
  if (horizon < 0) throw std::invalid_argument("predict_barycentric: negative horizon");
  if (mem.memory_lag % mem.forward_step != 0) {
    throw std::invalid_argument("predict_barycentric: memory_lag must be a multiple of forward_step");
  }
  const int q = mem.memory_lag / mem.forward_step;
  const int needed = (mem.depth - 1) * q + 1;
  if (warmup_gammas.cols() < needed || warmup_gammas.rows() != k) {
    throw std::invalid_argument("predict_barycentric: insufficient warmup");
  }
  const IndexOrdering ordering(k, mem.depth);
  if (lambda_hat.cols() != ordering.size()) {
    throw std::invalid_argument("predict_barycentric: propagator shape mismatch");
  }

  std::deque<Vector> history;
  for (int j = needed; j >= 1; --j) {
    history.emplace_back(warmup_gammas.col(warmup_gammas.cols() - j));
  }
  Matrix out(k, horizon);
  for (int step = 0; step < horizon; ++step) {
    const Vector psi = psi_from_history(history, needed - 1, q, ordering);
    Vector g = renormalize_stochastic(lambda_hat * psi);
    out.col(step) = g;
    history.pop_front();
    history.push_back(std::move(g));
  }
  return out;
}

Matrix predict_barycentric(const MspaModel& model, const Matrix& warmup_gammas,
                           int horizon) {
  return predict_barycentric(model.lambda_hat, model.mem, warmup_gammas, horizon);
}

Matrix predict(const MspaModel& model, const Matrix& warmup_raw, int horizon) {
  if (horizon < 0) throw std::invalid_argument("predict: negative horizon");
  if (warmup_raw.rows() != model.dim()) {
    throw std::invalid_argument("predict: warmup dimension mismatch");
  }
  const MemoryConfig& mem = model.mem;
  mem.validate(model.k());
  if (mem.memory_lag % mem.forward_step != 0) {
    throw std::invalid_argument("predict: memory_lag must be a multiple of forward_step");
  }
  const int q = mem.memory_lag / mem.forward_step;
  const int needed = (mem.depth - 1) * q + 1;
  const int span = (mem.depth - 1) * mem.memory_lag;
  if (warmup_raw.cols() < span + 1) throw std::invalid_argument("predict: insufficient warmup");

  // Project the warmup states at forward-step granularity, oldest first.
  Matrix picked(model.dim(), needed);
  for (int j = 0; j < needed; ++j) {
    picked.col(j) =
        warmup_raw.col(warmup_raw.cols() - 1 - Eigen::Index(needed - 1 - j) * mem.forward_step);
  }
  const Matrix gammas = project_trajectory(model.sigma_learn, model.normalization.forward(picked));

  const IndexOrdering ordering(model.k(), mem.depth);
  std::deque<Vector> history;
  for (int j = 0; j < needed; ++j) history.emplace_back(gammas.col(j));

  Matrix out(model.dim(), horizon);
  for (int step = 0; step < horizon; ++step) {
    const Vector psi = psi_from_history(history, needed - 1, q, ordering);
    Vector g = renormalize_stochastic(model.lambda_hat * psi);
    history.pop_front();
    history.push_back(std::move(g));
    const Vector psi_next = psi_from_history(history, needed - 1, q, ordering);
    const Vector lifted = renormalize_stochastic(model.lambda_lift * psi_next);
    out.col(step) = model.normalization.inverse(Vector(model.sigma_lift * lifted));
  }
  return out;
}

namespace {

constexpr const char* kModelFormat = "mspa-model-1";

void emit_number(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

void emit_vector(std::ostream& out, const Vector& v) {
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out << ',';
    emit_number(out, v[i]);
  }
  out << ']';
}

void emit_matrix(std::ostream& out, const char* key, const Matrix& m, const char* indent) {
  out << indent << '"' << key << "\": [";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r > 0) out << ',';
    out << "\n" << indent << "  ";
    emit_vector(out, m.row(r));
  }
  out << "\n" << indent << ']';
}

Matrix parse_matrix(const nlohmann::json& j, const char* key) {
  const auto& rows = j.at(key);
  if (!rows.is_array() || rows.empty()) {
    throw std::invalid_argument(std::string("model file: bad matrix ") + key);
  }
  const std::size_t cols = rows[0].size();
  Matrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw std::invalid_argument(std::string("model file: ragged matrix ") + key);
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(Eigen::Index(r), Eigen::Index(c)) = rows[r][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const nlohmann::json& j, const char* key) {
  const auto& arr = j.at(key);
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[Eigen::Index(i)] = arr[i].get<double>();
  return v;
}

}  // namespace

void write_model(std::ostream& out, const MspaModel& model) {
  out << "{\n";
  out << "  \"format\": \"" << kModelFormat << "\",\n";
  out << "  \"memory\": {\"depth\": " << model.mem.depth
      << ", \"memory_lag\": " << model.mem.memory_lag
      << ", \"forward_step\": " << model.mem.forward_step << "},\n";
  out << "  \"normalization\": {\"lo\": ";
  emit_vector(out, model.normalization.lo);
  out << ", \"hi\": ";
  emit_vector(out, model.normalization.hi);
  out << "},\n";
  emit_matrix(out, "sigma_learn", model.sigma_learn, "  ");
  out << ",\n";
  emit_matrix(out, "sigma_lift", model.sigma_lift, "  ");
  out << ",\n";
  emit_matrix(out, "lambda_hat", model.lambda_hat, "  ");
  out << ",\n";
  emit_matrix(out, "lambda_lift", model.lambda_lift, "  ");
  out << "\n}\n";
}

MspaModel read_model(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.at("format").get<std::string>() != kModelFormat) {
    throw std::invalid_argument("model file: unsupported format version");
  }
  MspaModel model;
  const auto& mem = j.at("memory");
  model.mem.depth = mem.at("depth").get<int>();
  model.mem.memory_lag = mem.at("memory_lag").get<int>();
  model.mem.forward_step = mem.at("forward_step").get<int>();
  const auto& norm = j.at("normalization");
  model.normalization.lo = parse_vector(norm, "lo");
  model.normalization.hi = parse_vector(norm, "hi");
  model.sigma_learn = parse_matrix(j, "sigma_learn");
  model.sigma_lift = parse_matrix(j, "sigma_lift");
  model.lambda_hat = parse_matrix(j, "lambda_hat");
  model.lambda_lift = parse_matrix(j, "lambda_lift");

  model.mem.validate(model.k());
  const IndexOrdering ordering(model.k(), model.mem.depth);
  if (model.lambda_hat.rows() != model.k() || model.lambda_hat.cols() != ordering.size() ||
      model.lambda_lift.rows() != model.k_lift() ||
      model.lambda_lift.cols() != ordering.size() ||
      model.normalization.lo.size() != model.dim() ||
      model.normalization.hi.size() != model.dim() ||
      model.sigma_lift.rows() != model.dim()) {
    throw std::invalid_argument("model file: inconsistent shapes");
  }
  return model;
}

void save_model(const std::string& path, const MspaModel& model) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  write_model(out, model);
  if (!out) throw std::runtime_error("write failed: " + path);
}

MspaModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open for reading: " + path);
  return read_model(in);
}

}  // namespace mspa
