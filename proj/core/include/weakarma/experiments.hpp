#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weakarma/dist.hpp"
#include "weakarma/simulate.hpp"
#include "weakarma/varma.hpp"

namespace weakarma {

enum class ExperimentMode { Size, RawPower, SizeAdjustedPower };

enum class TestKind { BpSn, LbSn, BpStd, LbStd };
constexpr std::array<TestKind, 4> kAllTests = {TestKind::BpSn, TestKind::LbSn,
                                               TestKind::BpStd, TestKind::LbStd};
std::string test_label(TestKind kind);
TestKind test_from_label(const std::string& label);

/// Data generating process of one arm of an experiment.
struct DgpConfig {
  VarmaSpec spec;
  Eigen::VectorXd theta;
  NoiseKind noise;
};

/// Monte Carlo rejection-frequency experiment.
///
/// In Size mode the fitted spec must equal the DGP spec. In the power
/// modes the DGP is the alternative; SizeAdjustedPower additionally needs
/// null_theta, the parameter of the null model (fit_spec with the same
/// noise) used by the calibration pass that extracts empirical critical
/// values.
struct ExperimentPlan {
  DgpConfig dgp;
  VarmaSpec fit_spec;
  std::optional<Eigen::VectorXd> null_theta;
  std::vector<int> n_list;
  std::vector<int> m_list;
  int replications = 200;  // N
  double alpha = 0.05;
  ExperimentMode mode = ExperimentMode::Size;
  std::uint64_t seed = 0;
  int burnin = 1000;

  void validate() const;
};

/// Rejection rates in percent per (test, n, m) cell, with per-n counts of
/// excluded (non-convergent) fits. Standard chi-squared cells are n.a.
/// exactly where the degrees of freedom m d^2 - k0 are <= 0. A cell is
/// flagged unreliable when more than 20% of its replications failed.
struct FrequencyTable {
  struct Cell {
    double rate_pct = 0.0;
    int used = 0;
    bool na = false;
    bool unreliable = false;

    bool operator==(const Cell&) const = default;
  };

  std::vector<int> n_list;
  std::vector<int> m_list;
  int replications = 0;
  std::vector<int> failed_fits;    // per n
  std::vector<Cell> cells;         // [n][m][test], tests in kAllTests order

  Cell& at(int n_idx, int m_idx, TestKind kind);
  const Cell& at(int n_idx, int m_idx, TestKind kind) const;

  bool operator==(const FrequencyTable&) const = default;
};

/// Empirical size: simulate under the DGP, fit fit_spec, reject against
/// the tabulated U quantile (self-normalized tests) or the chi-squared
/// quantile (standard tests). Failed fits are excluded and counted.
FrequencyTable run_size(const ExperimentPlan& plan, const QuantileTable& table,
                        int threads = 1);

/// RawPower rejects the alternative with the asymptotic critical values.
/// SizeAdjustedPower first runs a calibration pass under the null DGP
/// (same replication count, stream indices offset) to extract empirical
/// critical values per (test, n, m).
FrequencyTable run_power(const ExperimentPlan& plan, const QuantileTable& table,
                         int threads = 1);

/// Renders the table as CSV (full precision, machine readable) or
/// Markdown (one decimal; rows n x m, columns per test).
/// parse_table_csv inverts the CSV form exactly.
std::string emit_table(const FrequencyTable& table, const std::string& format);
FrequencyTable parse_table_csv(const std::string& csv);

/// Named experiment presets at two scales ("desk", "full").
/// Size presets: arma11-{strong,garch,pt,pt2,rt}, varma11-{strong,arch,pt,pt2,rt},
/// wn-strong (white-noise null, no parameters).
/// Power presets: arma21-{strong,garch,pt,pt2,rt}, varma21-strong.
ExperimentPlan preset_plan(const std::string& name, const std::string& scale,
                           std::uint64_t seed);
std::vector<std::string> preset_names();

}  // namespace weakarma
