#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "weakarma/dist.hpp"
#include "weakarma/estimate.hpp"
#include "weakarma/selfnorm.hpp"

namespace weakarma {

enum class ReturnsTransform {
  LogReturns,                      // white-noise test on the returns
  SquaredLogReturnsMeanCorrected,  // ARMA(1,1) fit on centred squared returns
};

struct ReturnsPipelineConfig {
  std::string input_path;
  std::string price_column;
  ReturnsTransform transform = ReturnsTransform::LogReturns;
  std::vector<int> m_list = {1, 2, 3, 6, 12};
  double alpha = 0.05;
};

struct AnalysisResult {
  DiagnosticReport report;
  std::optional<ParamEstimate> fit;  // set for the squared-returns path
  Eigen::VectorXd series;            // the series the tests were run on
};

/// End-to-end diagnostics for daily price data. The LogReturns transform
/// treats the returns themselves as the residual sequence (no parameters
/// to estimate); the squared transform subtracts the sample mean of the
/// squared returns and fits an ARMA(1,1) before testing.
AnalysisResult analyze_returns(const ReturnsPipelineConfig& config,
                               const QuantileTable& table);

}  // namespace weakarma
