#include "weakarma/csv.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace weakarma {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

LoadedCsv load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("load_csv: " + path + " is empty");
  }
  LoadedCsv out;
  for (const auto& name : split_line(line)) out.columns.push_back(trimmed(name));
  const auto cols = out.columns.size();
  if (cols == 0) throw std::runtime_error("load_csv: " + path + " has no columns");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trimmed(line).empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != cols) {
      throw std::runtime_error("load_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected " + std::to_string(cols));
    }
    std::vector<double> row(cols);
    bool missing = false;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string cell = trimmed(fields[c]);
      if (cell.empty()) {
        missing = true;
        break;
      }
      std::size_t consumed = 0;
      try {
        row[c] = std::stod(cell, &consumed);
      } catch (const std::exception&) {
        consumed = 0;
      }
      if (consumed != cell.size()) {
        throw std::runtime_error("load_csv: unparsable cell '" + cell +
                                 "' at line " + std::to_string(line_no));
      }
    }
    if (missing) {
      ++out.dropped_rows;
      continue;
    }
    rows.push_back(std::move(row));
  }
  out.data.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out.data(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return out;
}

void write_csv(const std::string& path, const Eigen::MatrixXd& data,
               const std::vector<std::string>& columns) {
  if (static_cast<Eigen::Index>(columns.size()) != data.cols()) {
    throw std::invalid_argument("write_csv: column name count mismatch");
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    os << (c ? "," : "") << columns[c];
  }
  os << '\n';
  os << std::setprecision(17);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      os << (c ? "," : "") << data(r, c);
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write_csv: write failed for " + path);
}

Eigen::VectorXd log_returns(const Eigen::VectorXd& prices) {
  if (prices.size() < 2) {
    throw std::invalid_argument("log_returns: need at least two prices");
  }
  for (Eigen::Index i = 0; i < prices.size(); ++i) {
    if (!(prices(i) > 0.0)) {
      throw std::domain_error("log_returns: nonpositive price at index " +
                              std::to_string(i));
    }
  }
  Eigen::VectorXd r(prices.size() - 1);
  for (Eigen::Index i = 1; i < prices.size(); ++i) {
    r(i - 1) = std::log(prices(i)) - std::log(prices(i - 1));
  }
  return r;
}

}  // namespace weakarma
