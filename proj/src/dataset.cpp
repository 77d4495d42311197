#include "dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace rsc {

DataSet::DataSet(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.cols() < 1) fail(errc::invalid_input, "dataset: dimension must be positive");
  if (!rows_.allFinite()) fail(errc::invalid_input, "dataset: non-finite entries");
  for (Eigen::Index i = 0; i < rows_.rows(); ++i)
    if (rows_.row(i).squaredNorm() == 0.0) ++zero_rows_;
}

DataSet read_csv(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(errc::invalid_input, "csv: bad numeric cell '" + cell + "' in '" + path + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(errc::invalid_input, "csv: ragged rows in '" + path + "'");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(errc::invalid_input, "csv: no data rows in '" + path + "'");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return DataSet(std::move(m));
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(errc::io, "cannot write '" + path + "'");
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf;
      if (j + 1 < m.cols()) out << ',';
    }
    out << '\n';
  }
  if (!out) fail(errc::io, "write failed for '" + path + "'");
}

}  // namespace rsc
