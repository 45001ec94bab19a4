// Experiment harness: generate reference data, fit learning/lifting models,
// predict, evaluate, and run parameter sweeps. All commands are
// deterministic given --seed; the MSPA_THREADS environment variable controls
// sweep concurrency (default 1).

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mspa/baseline.hpp"
#include "mspa/io.hpp"
#include "mspa/metrics.hpp"
#include "mspa/pipeline.hpp"
#include "mspa/systems.hpp"

namespace {

using mspa::Matrix;
using mspa::Vector;

int thread_count() {
  const char* env = std::getenv("MSPA_THREADS");
  if (!env) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

Vector parse_vector_arg(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[Eigen::Index(i)] = values[i];
  return v;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string system;
  std::string out;
  int dim = 5;
  double forcing = 3.8;
  double h = 0.01;
  int steps = 1000;
  int discard = 0;
  int stride = 1;
  std::string x0;
  std::string coords;
  int grid_points = 100;
  mspa::ChuaParams chua;
};

int run_generate(const GenerateArgs& a) {
  Matrix traj;
  if (a.system == "lorenz96") {
    Vector x0;
    if (a.x0.empty()) {
      x0 = Vector::Constant(a.dim, a.forcing);
      x0[a.dim - 1] += 1e-4;
    } else {
      x0 = parse_vector_arg(a.x0);
    }
    const double f = a.forcing;
    traj = mspa::integrate_rk4([f](const Vector& x) { return mspa::lorenz96_rhs(x, f); },
                               x0, a.h, a.discard + a.steps * a.stride);
  } else if (a.system == "chua") {
    Vector x0 = a.x0.empty() ? parse_vector_arg("0.7,0,0") : parse_vector_arg(a.x0);
    const mspa::ChuaParams params = a.chua;
    traj = mspa::integrate_rk4([params](const Vector& x) { return mspa::chua_rhs(x, params); },
                               x0, a.h, a.discard + a.steps * a.stride);
  } else if (a.system == "ks") {
    mspa::KsSpec spec;
    spec.grid_points = a.grid_points;
    spec.step = a.h;
    spec.steps = a.discard + a.steps * a.stride;
    if (!a.x0.empty()) spec.initial = parse_vector_arg(a.x0);
    traj = mspa::integrate_ks_etdrk4(spec);
  } else {
    throw CLI::ValidationError("--system", "unknown system: " + a.system);
  }

  Matrix kept(traj.rows(), a.steps);
  for (int t = 0; t < a.steps; ++t) kept.col(t) = traj.col(a.discard + t * a.stride);
  if (!a.coords.empty()) {
    std::vector<int> coords;
    const Vector v = parse_vector_arg(a.coords);
    for (Eigen::Index i = 0; i < v.size(); ++i) coords.push_back(int(v[i]) - 1);  // 1-based flag
    kept = mspa::select_observable(kept, coords);
  }
  mspa::write_trajectory_csv(a.out, kept);
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data;
  std::string out;
  int k = 3;
  int k_lift = 8;
  int depth = 1;
  int lag = 1;
  int forward = 1;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 1000;
  int restarts = 5;
};

int run_fit(const FitArgs& a) {
  const Matrix data = mspa::read_trajectory_csv(a.data);
  mspa::SpaConfig cfg{a.tol, a.max_iter, a.seed, a.restarts};
  mspa::MemoryConfig mem{a.depth, a.lag, a.forward};
  mspa::TrainReport report;
  const mspa::MspaModel model = mspa::train(data, a.k, a.k_lift, mem, cfg, &report);
  mspa::save_model(a.out, model);
  std::cout << "spa1_learn_residual " << report.spa1_learn << "\n"
            << "spa1_lift_residual " << report.spa1_lift << "\n"
            << "mspa_residual " << report.mspa << "\n"
            << "lifting_residual " << report.lifting << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  std::string warmup;
  std::string out;
  int horizon = 0;
};

int run_predict(const PredictArgs& a) {
  const mspa::MspaModel model = mspa::load_model(a.model);
  const Matrix warmup = mspa::read_trajectory_csv(a.warmup);
  if (warmup.rows() != model.dim()) {
    throw std::invalid_argument("predict: warmup dimension does not match the model");
  }
  const Matrix pred = mspa::predict(model, warmup, a.horizon);
  mspa::write_trajectory_csv(a.out, pred);
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string truth;
  std::string pred;
  std::string metrics = "true_error";
  std::string out;
  int kmax = 0;
  int maxlag = 0;
};

std::vector<Matrix> read_realization_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::invalid_argument("no CSV files in " + dir);
  std::vector<Matrix> out;
  for (const auto& f : files) out.push_back(mspa::read_trajectory_csv(f));
  return out;
}

int run_eval(const EvalArgs& a) {
  std::ofstream out(a.out);
  if (!out) throw std::invalid_argument("cannot open for writing: " + a.out);
  out << "metric,k,value\n";
  std::stringstream metrics(a.metrics);
  std::string metric;
  while (std::getline(metrics, metric, ',')) {
    if (metric == "true_error" || metric == "bary_error") {
      const Matrix truth = mspa::read_trajectory_csv(a.truth);
      const Matrix pred = mspa::read_trajectory_csv(a.pred);
      for (int k = 0; k <= a.kmax; ++k) {
        out << metric << ',' << k << ','
            << mspa::format_shortest(mspa::avg_k_step_error(truth, pred, k)) << '\n';
      }
    } else if (metric == "hausdorff") {
      const Matrix truth = mspa::read_trajectory_csv(a.truth);
      const Matrix pred = mspa::read_trajectory_csv(a.pred);
      out << metric << ",0," << mspa::format_shortest(mspa::hausdorff(truth, pred)) << '\n';
    } else if (metric == "autocorr") {
      const auto truth = read_realization_dir(a.truth);
      const auto pred = read_realization_dir(a.pred);
      const int coords = int(truth.front().rows());
      for (int c = 0; c < coords; ++c) {
        for (int l = 0; l <= a.maxlag; ++l) {
          out << "autocorr_truth_c" << (c + 1) << ',' << l << ','
              << mspa::format_shortest(mspa::autocorrelation(truth, c, l)) << '\n';
          out << "autocorr_pred_c" << (c + 1) << ',' << l << ','
              << mspa::format_shortest(mspa::autocorrelation(pred, c, l)) << '\n';
        }
      }
    } else {
      throw CLI::ValidationError("--metrics", "unknown metric: " + metric);
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepConfig {
  std::string system = "chua";
  std::string data_file;
  double h = 0.001;
  int steps = 20000;
  int discard = 0;
  mspa::ChuaParams chua;
  Vector x0;
  int k = 3;
  int k_lift = 4;
  std::vector<int> depths{6};
  std::vector<int> lags{25};
  std::vector<double> scales{1.0};
  int forward = 1;
  int rollout = 20000;
  int hausdorff_stride = 10;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 1000;
  int restarts = 5;
};

SweepConfig parse_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path);
  SweepConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto int_list = [&](const std::string& v) {
      std::vector<int> r;
      const Vector parsed = parse_vector_arg(v);
      for (Eigen::Index i = 0; i < parsed.size(); ++i) r.push_back(int(parsed[i]));
      return r;
    };
    auto double_list = [&](const std::string& v) {
      std::vector<double> r;
      const Vector parsed = parse_vector_arg(v);
      for (Eigen::Index i = 0; i < parsed.size(); ++i) r.push_back(parsed[i]);
      return r;
    };
    if (key == "system") cfg.system = value;
    else if (key == "data") cfg.data_file = value;
    else if (key == "h") cfg.h = std::stod(value);
    else if (key == "steps") cfg.steps = std::stoi(value);
    else if (key == "discard") cfg.discard = std::stoi(value);
    else if (key == "x0") cfg.x0 = parse_vector_arg(value);
    else if (key == "alpha") cfg.chua.alpha = std::stod(value);
    else if (key == "beta") cfg.chua.beta = std::stod(value);
    else if (key == "mu0") cfg.chua.mu0 = std::stod(value);
    else if (key == "mu1") cfg.chua.mu1 = std::stod(value);
    else if (key == "k") cfg.k = std::stoi(value);
    else if (key == "k_lift") cfg.k_lift = std::stoi(value);
    else if (key == "depths") cfg.depths = int_list(value);
    else if (key == "lags") cfg.lags = int_list(value);
    else if (key == "scales") cfg.scales = double_list(value);
    else if (key == "forward") cfg.forward = std::stoi(value);
    else if (key == "rollout") cfg.rollout = std::stoi(value);
    else if (key == "hausdorff_stride") cfg.hausdorff_stride = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "tol") cfg.tol = std::stod(value);
    else if (key == "max_iter") cfg.max_iter = std::stoi(value);
    else if (key == "restarts") cfg.restarts = std::stoi(value);
    else throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  if (cfg.lags.empty() || cfg.scales.empty() || cfg.depths.empty()) {
    throw std::invalid_argument("sweep config: empty grid");
  }
  return cfg;
}

Matrix subsample_columns(const Matrix& m, int stride) {
  const int n = int((m.cols() + stride - 1) / stride);
  Matrix out(m.rows(), n);
  for (int j = 0; j < n; ++j) out.col(j) = m.col(Eigen::Index(j) * stride);
  return out;
}

struct SweepRow {
  int depth;
  int lag;
  double scale;
  double hausdorff_bary;
  double hausdorff_full;
};

int run_sweep(const std::string& config_path, const std::string& out_dir) {
  const SweepConfig cfg = parse_sweep_config(config_path);

  Matrix data;
  if (!cfg.data_file.empty()) {
    data = mspa::read_trajectory_csv(cfg.data_file);
  } else if (cfg.system == "chua") {
    const Vector x0 = cfg.x0.size() == 3 ? cfg.x0 : parse_vector_arg("0.7,0,0");
    const mspa::ChuaParams params = cfg.chua;
    const Matrix traj =
        mspa::integrate_rk4([params](const Vector& x) { return mspa::chua_rhs(x, params); },
                            x0, cfg.h, cfg.discard + cfg.steps);
    data = traj.rightCols(cfg.steps);
  } else {
    throw std::invalid_argument("sweep: unsupported system '" + cfg.system + "'");
  }

  const mspa::Normalization norm = mspa::Normalization::fit(data);
  const Matrix y = norm.forward(data);
  const mspa::SpaConfig solver{cfg.tol, cfg.max_iter, cfg.seed, cfg.restarts};
  const mspa::SpaSolution learn = mspa::solve_spa1(y, cfg.k, solver);
  const mspa::SpaSolution lift =
      cfg.k_lift == cfg.k ? learn : mspa::solve_spa1(y, cfg.k_lift, solver);
  const Vector centroid = learn.sigma.rowwise().mean();

  std::vector<SweepRow> rows;
  for (int depth : cfg.depths)
    for (int lag : cfg.lags)
      for (double scale : cfg.scales) rows.push_back({depth, lag, scale, 0.0, 0.0});

  parallel_for(int(rows.size()), thread_count(), [&](int idx) {
    SweepRow& row = rows[std::size_t(idx)];
    Matrix sigma = ((learn.sigma.colwise() - centroid) * row.scale).colwise() + centroid;
    const Matrix gamma = mspa::project_trajectory(sigma, y);
    const mspa::MemoryConfig mem{row.depth, row.lag, cfg.forward};
    const mspa::MspaFit fit = mspa::solve_mspa(gamma, mem, solver);

    const mspa::IndexOrdering ordering(cfg.k, row.depth);
    const int first_t = (row.depth - 1) * row.lag;
    Matrix features(ordering.size(), gamma.cols() - first_t);
    std::vector<Vector> hist(row.depth);
    for (int t = first_t; t < int(gamma.cols()); ++t) {
      for (int m = 0; m < row.depth; ++m) hist[std::size_t(m)] = gamma.col(t - m * row.lag);
      features.col(t - first_t) = mspa::path_affiliation(hist, ordering);
    }
    const Matrix lift_targets = lift.gamma.rightCols(lift.gamma.cols() - first_t);
    const mspa::StochasticFit lift_fit = mspa::fit_column_stochastic(
        lift_targets, features,
        Matrix::Constant(cfg.k_lift, ordering.size(), 1.0 / double(cfg.k_lift)), cfg.tol,
        cfg.max_iter);

    // Rollout in barycentric coordinates and lift every state.
    const int warm_cols = first_t + 1;
    const mspa::MemoryConfig roll_mem{row.depth, row.lag, cfg.forward};
    const Matrix pred_gamma = mspa::predict_barycentric(
        fit.lambda, roll_mem, gamma.leftCols(warm_cols), cfg.rollout);
    Matrix pred_full(data.rows(), pred_gamma.cols());
    {
      std::deque<Vector> hist_q;
      for (int j = 0; j < warm_cols; ++j) hist_q.emplace_back(gamma.col(j));
      for (int s = 0; s < int(pred_gamma.cols()); ++s) {
        hist_q.pop_front();
        hist_q.emplace_back(pred_gamma.col(s));
        std::vector<Vector> lags_v(row.depth);
        for (int m = 0; m < row.depth; ++m) {
          lags_v[std::size_t(m)] = hist_q[hist_q.size() - 1 - std::size_t(m) * std::size_t(row.lag)];
        }
        const Vector psi = mspa::path_affiliation(lags_v, ordering);
        pred_full.col(s) = norm.inverse(Vector(lift.sigma * (lift_fit.lambda * psi)));
      }
    }
    row.hausdorff_bary = mspa::hausdorff(subsample_columns(gamma, cfg.hausdorff_stride),
                                         subsample_columns(pred_gamma, cfg.hausdorff_stride));
    row.hausdorff_full = mspa::hausdorff(subsample_columns(data, cfg.hausdorff_stride),
                                         subsample_columns(pred_full, cfg.hausdorff_stride));
  });

  std::filesystem::create_directories(out_dir);
  const std::string out_path = out_dir + "/sweep.csv";
  std::ofstream out(out_path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + out_path);
  out << "depth,lag,scale,hausdorff_bary,hausdorff_full\n";
  for (const auto& row : rows) {
    out << row.depth << ',' << row.lag << ',' << mspa::format_shortest(row.scale) << ','
        << mspa::format_shortest(row.hausdorff_bary) << ','
        << mspa::format_shortest(row.hausdorff_full) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polytope-projection modelling of dynamical systems"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cmd_gen = app.add_subcommand("generate", "integrate a reference system to CSV");
  cmd_gen->add_option("--system", gen.system, "lorenz96 | chua | ks")->required();
  cmd_gen->add_option("--out", gen.out)->required();
  cmd_gen->add_option("--dim", gen.dim);
  cmd_gen->add_option("--forcing", gen.forcing);
  cmd_gen->add_option("--step", gen.h);
  cmd_gen->add_option("--steps", gen.steps, "rows kept after discarding and striding");
  cmd_gen->add_option("--discard", gen.discard);
  cmd_gen->add_option("--stride", gen.stride);
  cmd_gen->add_option("--x0", gen.x0, "comma-separated initial state");
  cmd_gen->add_option("--coords", gen.coords, "1-based observable coordinates");
  cmd_gen->add_option("--grid-points", gen.grid_points);
  cmd_gen->add_option("--alpha", gen.chua.alpha);
  cmd_gen->add_option("--beta", gen.chua.beta);
  cmd_gen->add_option("--mu0", gen.chua.mu0);
  cmd_gen->add_option("--mu1", gen.chua.mu1);

  FitArgs fit;
  auto* cmd_fit = app.add_subcommand("fit", "train a learning/lifting model");
  cmd_fit->add_option("--data", fit.data)->required();
  cmd_fit->add_option("--out", fit.out)->required();
  cmd_fit->add_option("--k", fit.k)->required();
  cmd_fit->add_option("--k-lift", fit.k_lift)->required();
  cmd_fit->add_option("--depth", fit.depth);
  cmd_fit->add_option("--lag", fit.lag);
  cmd_fit->add_option("--forward", fit.forward);
  cmd_fit->add_option("--seed", fit.seed);
  cmd_fit->add_option("--tol", fit.tol);
  cmd_fit->add_option("--max-iter", fit.max_iter);
  cmd_fit->add_option("--restarts", fit.restarts);

  PredictArgs pred;
  auto* cmd_pred = app.add_subcommand("predict", "roll a model forward");
  cmd_pred->add_option("--model", pred.model)->required();
  cmd_pred->add_option("--warmup", pred.warmup)->required();
  cmd_pred->add_option("--horizon", pred.horizon)->required();
  cmd_pred->add_option("--out", pred.out)->required();

  EvalArgs eval;
  auto* cmd_eval = app.add_subcommand("eval", "error metrics between trajectories");
  cmd_eval->add_option("--truth", eval.truth)->required();
  cmd_eval->add_option("--pred", eval.pred)->required();
  cmd_eval->add_option("--metrics", eval.metrics, "true_error,bary_error,hausdorff,autocorr");
  cmd_eval->add_option("--out", eval.out)->required();
  cmd_eval->add_option("--kmax", eval.kmax);
  cmd_eval->add_option("--maxlag", eval.maxlag);

  std::string sweep_config, sweep_out;
  auto* cmd_sweep = app.add_subcommand("sweep", "grid study over lag/scale/depth");
  cmd_sweep->add_option("--config", sweep_config)->required();
  cmd_sweep->add_option("--out-dir", sweep_out)->required();

  try {
    app.parse(argc, argv);
    if (cmd_gen->parsed()) return run_generate(gen);
    if (cmd_fit->parsed()) return run_fit(fit);
    if (cmd_pred->parsed()) return run_predict(pred);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_sweep->parsed()) return run_sweep(sweep_config, sweep_out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
