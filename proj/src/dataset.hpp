#pragma once

#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace rsc {

// Ordered sample of n observations in R^p, mean known zero. Zero rows are
// legal input (they drive the breakdown analysis) and are counted up front.
class DataSet {
 public:
  explicit DataSet(Matrix rows);

  Eigen::Index n() const { return rows_.rows(); }
  Eigen::Index p() const { return rows_.cols(); }
  const Matrix& rows() const { return rows_; }
  auto row(Eigen::Index i) const { return rows_.row(i); }
  int zero_row_count() const { return zero_rows_; }

  const std::optional<std::vector<int>>& outlier_indices() const { return outliers_; }
  void set_outlier_indices(std::vector<int> idx) { outliers_ = std::move(idx); }

 private:
  Matrix rows_;
  int zero_rows_ = 0;
  std::optional<std::vector<int>> outliers_;
};

// Plain numeric CSV, rows = observations, comma separated. skip_header drops
// the first line unconditionally.
DataSet read_csv(const std::string& path, bool skip_header);

void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace rsc
