#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace weakarma {

struct LoadedCsv {
  Eigen::MatrixXd data;              // rows in file order
  std::vector<std::string> columns;  // header names
  int dropped_rows = 0;              // rows skipped due to missing cells
};

/// Reads a numeric CSV with a header row. Rows containing an empty cell
/// are dropped and counted in dropped_rows. Throws std::runtime_error
/// with the line number on an unparsable cell, and for an empty file.
LoadedCsv load_csv(const std::string& path);

/// Writes a matrix with the given column names at full double precision,
/// so that load_csv(write_csv(...)) reproduces the matrix exactly.
void write_csv(const std::string& path, const Eigen::MatrixXd& data,
               const std::vector<std::string>& columns);

/// r_t = log(p_t) - log(p_{t-1}); the result has length prices.size() - 1.
/// Throws std::domain_error naming the index of a nonpositive price and
/// std::invalid_argument when fewer than two prices are given.
Eigen::VectorXd log_returns(const Eigen::VectorXd& prices);

}  // namespace weakarma
