#include "weakarma/analyze.hpp"

#include <algorithm>
#include <stdexcept>

#include "weakarma/csv.hpp"

namespace weakarma {

AnalysisResult analyze_returns(const ReturnsPipelineConfig& config,
                               const QuantileTable& table) {
  if (config.m_list.empty() ||
      !std::is_sorted(config.m_list.begin(), config.m_list.end())) {
    throw std::invalid_argument("analyze_returns: m_list must be nonempty ascending");
  }
  const LoadedCsv csv = load_csv(config.input_path);
  int column = -1;
  for (std::size_t c = 0; c < csv.columns.size(); ++c) {
    if (csv.columns[c] == config.price_column) {
      column = static_cast<int>(c);
      break;
    }
  }
  if (column < 0) {
    throw std::invalid_argument("analyze_returns: no column named '" +
                                config.price_column + "' in " + config.input_path);
  }
  const Eigen::VectorXd returns = log_returns(csv.data.col(column));

  AnalysisResult result;
  if (config.transform == ReturnsTransform::LogReturns) {
    result.series = returns;
    VarmaSpec spec{1, 0, 0, {}};
    const ParamEstimate fit = qmle_fit(spec, result.series);
    result.report =
        run_diagnostics(spec, fit, result.series, config.m_list, table);
  } else {
    Eigen::VectorXd squared = returns.cwiseAbs2();
    squared.array() -= squared.mean();
    result.series = squared;
    const VarmaSpec spec = VarmaSpec::full(1, 1, 1);
    ParamEstimate fit = qmle_fit(spec, result.series);
    result.fit = fit;
    result.report =
        run_diagnostics(spec, fit, result.series, config.m_list, table);
  }
  return result;
}

}  // namespace weakarma
