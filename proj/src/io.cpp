#include "mspa/io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mspa {

std::string format_shortest(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_trajectory_csv(const std::string& path, const Matrix& data) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  for (Eigen::Index d = 0; d < data.rows(); ++d) {
    out << (d == 0 ? "c" : ",c") << (d + 1);
  }
  out << '\n';
  for (Eigen::Index t = 0; t < data.cols(); ++t) {
    for (Eigen::Index d = 0; d < data.rows(); ++d) {
      if (d > 0) out << ',';
      out << format_shortest(data(d, t));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Matrix read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV: " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) throw std::invalid_argument("bad numeric cell in " + path);
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::invalid_argument("ragged CSV rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix data(rows.front().size(), rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t d = 0; d < rows[t].size(); ++d) {
      data(Eigen::Index(d), Eigen::Index(t)) = rows[t][d];
    }
  }
  return data;
}

}  // namespace mspa
