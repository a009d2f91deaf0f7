#include "weakarma/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "weakarma/estimate.hpp"
#include "weakarma/parallel.hpp"
#include "weakarma/selfnorm.hpp"

namespace weakarma {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string test_label(TestKind kind) {
  switch (kind) {
    case TestKind::BpSn: return "bp_sn";
    case TestKind::LbSn: return "lb_sn";
    case TestKind::BpStd: return "bp_s";
    case TestKind::LbStd: return "lb_s";
  }
  return "?";
}

TestKind test_from_label(const std::string& label) {
  for (TestKind kind : kAllTests) {
    if (test_label(kind) == label) return kind;
  }
  throw std::invalid_argument("unknown test label: " + label);
}

void ExperimentPlan::validate() const {
  dgp.spec.validate();
  fit_spec.validate();
  validate_noise(dgp.noise);
  if (replications < 1) throw std::invalid_argument("plan: N must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("plan: alpha must be in (0,1)");
  }
  if (n_list.empty() || m_list.empty()) {
    throw std::invalid_argument("plan: n_list and m_list must be nonempty");
  }
  for (int m : m_list) {
    if (m < 1) throw std::invalid_argument("plan: every m must be >= 1");
  }
  if (dgp.theta.size() != dgp.spec.k0()) {
    throw std::invalid_argument("plan: dgp theta length does not match spec");
  }
  if (mode == ExperimentMode::Size) {
    if (!(dgp.spec == fit_spec)) {
      throw std::invalid_argument("plan: size mode requires dgp spec == fit spec");
    }
  } else {
    if (dgp.spec == fit_spec) {
      throw std::invalid_argument("plan: power modes require dgp spec != fit spec");
    }
  }
  if (mode == ExperimentMode::SizeAdjustedPower) {
    if (!null_theta || null_theta->size() != fit_spec.k0()) {
      throw std::invalid_argument(
          "plan: size-adjusted power requires null_theta of length k0(fit_spec)");
    }
  }
}

FrequencyTable::Cell& FrequencyTable::at(int n_idx, int m_idx, TestKind kind) {
  const int tests = static_cast<int>(kAllTests.size());
  return cells[static_cast<std::size_t>((n_idx * static_cast<int>(m_list.size()) +
                                         m_idx) *
                                            tests +
                                        static_cast<int>(kind))];
}

const FrequencyTable::Cell& FrequencyTable::at(int n_idx, int m_idx,
                                               TestKind kind) const {
  const int tests = static_cast<int>(kAllTests.size());
  return cells[static_cast<std::size_t>((n_idx * static_cast<int>(m_list.size()) +
                                         m_idx) *
                                            tests +
                                        static_cast<int>(kind))];
}

namespace {

// Stream layout: bits 56+ select the pass (evaluation / calibration),
// bits 40..55 the n index, so replication r of any pass is reproducible
// in isolation.
std::uint64_t stream_index(int purpose, int n_idx, int r) {
  return (static_cast<std::uint64_t>(purpose) << 56) |
         (static_cast<std::uint64_t>(n_idx) << 40) |
         static_cast<std::uint64_t>(r);
}

struct RepStats {
  bool fit_ok = false;
  // values[m_idx][test], NaN when unavailable
  std::vector<std::array<double, 4>> values;
};

RepStats run_replication(const DgpConfig& dgp, const VarmaSpec& fit_spec,
                         int n, const std::vector<int>& m_list, int burnin,
                         std::uint64_t seed, std::uint64_t stream,
                         const QuantileTable& table) {
  RepStats rep;
  rep.values.assign(m_list.size(), {kNaN, kNaN, kNaN, kNaN});
  RngStream rng(seed, stream);
  const TimeSeries x = simulate_varma(dgp.spec, dgp.theta, dgp.noise, n, burnin, rng);
  ParamEstimate fit;
  try {
    fit = qmle_fit(fit_spec, x);
  } catch (const std::domain_error&) {
    return rep;
  }
  if (!fit.converged) return rep;
  DiagnosticReport report;
  try {
    report = run_diagnostics(fit_spec, fit, x, m_list, table);
  } catch (const std::runtime_error&) {
    return rep;  // degenerate residuals
  }
  rep.fit_ok = true;
  const bool multivariate = fit_spec.d > 1;
  for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
    const DiagnosticRow& row = report.rows[mi];
    auto& v = rep.values[mi];
    v[static_cast<int>(TestKind::BpSn)] = row.q_sn;
    v[static_cast<int>(TestKind::LbSn)] = row.q_sn_tilde;
    v[static_cast<int>(TestKind::BpStd)] = multivariate ? row.q_c : row.q_bp;
    v[static_cast<int>(TestKind::LbStd)] = multivariate ? row.q_h : row.q_lb;
  }
  return rep;
}

// Critical values per (m, test): NaN marks a cell without a usable
// critical value (n.a. for chi-squared tests when df <= 0).
using CritGrid = std::vector<std::array<double, 4>>;

CritGrid asymptotic_crits(const ExperimentPlan& plan, const QuantileTable& table) {
  const int d = plan.fit_spec.d;
  const int k0 = plan.fit_spec.k0();
  CritGrid crits(plan.m_list.size());
  for (std::size_t mi = 0; mi < plan.m_list.size(); ++mi) {
    const int md2 = plan.m_list[mi] * d * d;
    const double u_crit = table.quantile(md2, 1.0 - plan.alpha);
    const int df = md2 - k0;
    const double chi_crit =
        df > 0 ? chi2_quantile(1.0 - plan.alpha, df) : kNaN;
    crits[mi] = {u_crit, u_crit, chi_crit, chi_crit};
  }
  return crits;
}

std::vector<RepStats> run_pass(const ExperimentPlan& plan, const DgpConfig& dgp,
                               int purpose, int n_idx, int n,
                               const QuantileTable& table, int threads) {
  std::vector<RepStats> reps(static_cast<std::size_t>(plan.replications));
  parallel_for(plan.replications, threads, [&](int r) {
    reps[static_cast<std::size_t>(r)] =
        run_replication(dgp, plan.fit_spec, n, plan.m_list, plan.burnin,
                        plan.seed, stream_index(purpose, n_idx, r), table);
  });
  return reps;
}

FrequencyTable aggregate(const ExperimentPlan& plan,
                         const std::vector<std::vector<RepStats>>& by_n,
                         const std::vector<CritGrid>& crits_by_n) {
  FrequencyTable out;
  out.n_list = plan.n_list;
  out.m_list = plan.m_list;
  out.replications = plan.replications;
  out.failed_fits.assign(plan.n_list.size(), 0);
  out.cells.assign(plan.n_list.size() * plan.m_list.size() * kAllTests.size(),
                   FrequencyTable::Cell{});
  for (std::size_t ni = 0; ni < plan.n_list.size(); ++ni) {
    const auto& reps = by_n[ni];
    int failed = 0;
    for (const auto& rep : reps) {
      if (!rep.fit_ok) ++failed;
    }
    out.failed_fits[ni] = failed;
    const bool unreliable =
        failed > static_cast<int>(0.2 * plan.replications);
    for (std::size_t mi = 0; mi < plan.m_list.size(); ++mi) {
      for (TestKind kind : kAllTests) {
        FrequencyTable::Cell cell;
        const double crit = crits_by_n[ni][mi][static_cast<int>(kind)];
        if (std::isnan(crit)) {
          cell.na = true;
        } else {
          int used = 0;
          int rejected = 0;
          for (const auto& rep : reps) {
            if (!rep.fit_ok) continue;
            const double value = rep.values[mi][static_cast<int>(kind)];
            if (std::isnan(value)) continue;
            ++used;
            if (value > crit) ++rejected;
          }
          cell.used = used;
          cell.rate_pct =
              used > 0 ? 100.0 * static_cast<double>(rejected) / used : 0.0;
          cell.unreliable = unreliable;
        }
        out.at(static_cast<int>(ni), static_cast<int>(mi), kind) = cell;
      }
    }
  }
  return out;
}

}  // namespace

FrequencyTable run_size(const ExperimentPlan& plan, const QuantileTable& table,
                        int threads) {
  plan.validate();
  if (plan.mode != ExperimentMode::Size) {
    throw std::invalid_argument("run_size: plan.mode must be Size");
  }
  const CritGrid crits = asymptotic_crits(plan, table);
  std::vector<std::vector<RepStats>> by_n;
  std::vector<CritGrid> crits_by_n;
  for (std::size_t ni = 0; ni < plan.n_list.size(); ++ni) {
    by_n.push_back(run_pass(plan, plan.dgp, 0, static_cast<int>(ni),
                            plan.n_list[ni], table, threads));
    crits_by_n.push_back(crits);
  }
  return aggregate(plan, by_n, crits_by_n);
}

FrequencyTable run_power(const ExperimentPlan& plan, const QuantileTable& table,
                         int threads) {
  plan.validate();
  if (plan.mode == ExperimentMode::Size) {
    throw std::invalid_argument("run_power: plan.mode must be a power mode");
  }
  const CritGrid asymptotic = asymptotic_crits(plan, table);
  std::vector<std::vector<RepStats>> by_n;
  std::vector<CritGrid> crits_by_n;
  for (std::size_t ni = 0; ni < plan.n_list.size(); ++ni) {
    const int n = plan.n_list[ni];
    CritGrid crits = asymptotic;
    if (plan.mode == ExperimentMode::SizeAdjustedPower) {
      DgpConfig null_dgp{plan.fit_spec, *plan.null_theta, plan.dgp.noise};
      const auto null_reps =
          run_pass(plan, null_dgp, 1, static_cast<int>(ni), n, table, threads);
      for (std::size_t mi = 0; mi < plan.m_list.size(); ++mi) {
        for (TestKind kind : kAllTests) {
          if (std::isnan(asymptotic[mi][static_cast<int>(kind)])) continue;
          std::vector<double> values;
          values.reserve(null_reps.size());
          for (const auto& rep : null_reps) {
            if (!rep.fit_ok) continue;
            const double v = rep.values[mi][static_cast<int>(kind)];
            if (!std::isnan(v)) values.push_back(v);
          }
          if (values.empty()) {
            crits[mi][static_cast<int>(kind)] = kNaN;
            continue;
          }
          std::sort(values.begin(), values.end());
          auto idx = static_cast<std::ptrdiff_t>(
              std::floor((1.0 - plan.alpha) * static_cast<double>(values.size())));
          idx = std::min<std::ptrdiff_t>(idx,
                                         static_cast<std::ptrdiff_t>(values.size()) - 1);
          crits[mi][static_cast<int>(kind)] = values[static_cast<std::size_t>(idx)];
        }
      }
    }
    by_n.push_back(
        run_pass(plan, plan.dgp, 0, static_cast<int>(ni), n, table, threads));
    crits_by_n.push_back(crits);
  }
  return aggregate(plan, by_n, crits_by_n);
}

namespace {

std::string format_full(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::string emit_table(const FrequencyTable& table, const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    os << "n,m,bp_sn,lb_sn,bp_s,lb_s,bp_sn_used,lb_sn_used,bp_s_used,lb_s_used,"
          "failed,replications\n";
    for (std::size_t ni = 0; ni < table.n_list.size(); ++ni) {
      for (std::size_t mi = 0; mi < table.m_list.size(); ++mi) {
        os << table.n_list[ni] << ',' << table.m_list[mi];
        for (TestKind kind : kAllTests) {
          const auto& cell = table.at(static_cast<int>(ni), static_cast<int>(mi), kind);
          os << ',' << (cell.na ? "n.a." : format_full(cell.rate_pct));
        }
        for (TestKind kind : kAllTests) {
          const auto& cell = table.at(static_cast<int>(ni), static_cast<int>(mi), kind);
          os << ',' << cell.used;
        }
        os << ',' << table.failed_fits[ni] << ',' << table.replications << '\n';
      }
    }
    return os.str();
  }
  if (format == "md") {
    os << "| n | m | BP_SN | LB_SN | BP_S | LB_S |\n";
    os << "|---|---|-------|-------|------|------|\n";
    os.setf(std::ios::fixed);
    os.precision(1);
    for (std::size_t ni = 0; ni < table.n_list.size(); ++ni) {
      for (std::size_t mi = 0; mi < table.m_list.size(); ++mi) {
        os << "| " << table.n_list[ni] << " | " << table.m_list[mi] << " |";
        for (TestKind kind : kAllTests) {
          const auto& cell = table.at(static_cast<int>(ni), static_cast<int>(mi), kind);
          if (cell.na) {
            os << " n.a. |";
          } else {
            os << ' ' << cell.rate_pct << (cell.unreliable ? "*" : "") << " |";
          }
        }
        os << '\n';
      }
    }
    bool any_failed = false;
    for (std::size_t ni = 0; ni < table.n_list.size(); ++ni) {
      if (table.failed_fits[ni] > 0) any_failed = true;
    }
    if (any_failed) {
      os << "\nExcluded non-convergent fits:";
      for (std::size_t ni = 0; ni < table.n_list.size(); ++ni) {
        os << " n=" << table.n_list[ni] << ": " << table.failed_fits[ni] << '/'
           << table.replications << ';';
      }
      os << " cells marked * had more than 20% failures.\n";
    }
    return os.str();
  }
  throw std::invalid_argument("emit_table: format must be csv or md");
}

FrequencyTable parse_table_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) {
    throw std::invalid_argument("parse_table_csv: empty input");
  }
  FrequencyTable out;
  struct Row {
    int n;
    int m;
    std::array<double, 4> rates;
    std::array<bool, 4> na;
    std::array<int, 4> used;
    int failed;
    int reps;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    Row row{};
    auto next = [&]() {
      if (!std::getline(ls, field, ',')) {
        throw std::invalid_argument("parse_table_csv: short row: " + line);
      }
      return field;
    };
    row.n = std::stoi(next());
    row.m = std::stoi(next());
    for (int t = 0; t < 4; ++t) {
      const std::string v = next();
      if (v == "n.a.") {
        row.na[t] = true;
        row.rates[t] = 0.0;
      } else {
        row.na[t] = false;
        row.rates[t] = std::stod(v);
      }
    }
    for (int t = 0; t < 4; ++t) row.used[t] = std::stoi(next());
    row.failed = std::stoi(next());
    row.reps = std::stoi(next());
    rows.push_back(row);
  }
  if (rows.empty()) return out;
  out.replications = rows.front().reps;
  for (const auto& row : rows) {
    if (std::find(out.n_list.begin(), out.n_list.end(), row.n) == out.n_list.end()) {
      out.n_list.push_back(row.n);
    }
    if (std::find(out.m_list.begin(), out.m_list.end(), row.m) == out.m_list.end()) {
      out.m_list.push_back(row.m);
    }
  }
  out.failed_fits.assign(out.n_list.size(), 0);
  out.cells.assign(out.n_list.size() * out.m_list.size() * kAllTests.size(),
                   FrequencyTable::Cell{});
  for (const auto& row : rows) {
    const auto ni = static_cast<int>(
        std::find(out.n_list.begin(), out.n_list.end(), row.n) - out.n_list.begin());
    const auto mi = static_cast<int>(
        std::find(out.m_list.begin(), out.m_list.end(), row.m) - out.m_list.begin());
    out.failed_fits[static_cast<std::size_t>(ni)] = row.failed;
    const bool unreliable = row.failed > static_cast<int>(0.2 * row.reps);
    for (TestKind kind : kAllTests) {
      auto& cell = out.at(ni, mi, kind);
      const int t = static_cast<int>(kind);
      cell.na = row.na[t];
      cell.rate_pct = row.rates[t];
      cell.used = row.used[t];
      cell.unreliable = cell.na ? false : unreliable;
    }
  }
  return out;
}

namespace {

DgpConfig univariate_arma11(const std::string& noise) {
  DgpConfig dgp;
  dgp.spec = VarmaSpec::full(1, 1, 1);
  dgp.theta = Eigen::Vector2d{0.95, -0.6};
  if (noise == "strong") {
    dgp.noise = StrongGaussian{Eigen::MatrixXd::Identity(1, 1)};
  } else if (noise == "garch") {
    dgp.noise = Garch11{1.0, 0.1, 0.85};
  } else if (noise == "pt") {
    dgp.noise = ProductPT{};
  } else if (noise == "pt2") {
    dgp.noise = ProductPTSquared{};
  } else if (noise == "rt") {
    dgp.noise = RatioRT{};
  } else {
    throw std::invalid_argument("unknown univariate noise: " + noise);
  }
  return dgp;
}

DgpConfig bivariate_varma11(const std::string& noise) {
  DgpConfig dgp;
  dgp.spec = VarmaSpec::full(2, 1, 1);
  Eigen::VectorXd theta(8);
  // Row-major [A_1; B_1]: A_1 = [1.2 -0.5; 0.6 0.3], B_1 = [-0.6 0.3; 0.3 0.6].
  theta << 1.2, -0.5, 0.6, 0.3, -0.6, 0.3, 0.3, 0.6;
  dgp.theta = theta;
  if (noise == "strong") {
    dgp.noise = StrongGaussian{Eigen::MatrixXd::Identity(2, 2)};
  } else if (noise == "arch") {
    dgp.noise = BiArch1{};
  } else if (noise == "pt") {
    dgp.noise = MultiPT{};
  } else if (noise == "pt2") {
    dgp.noise = MultiPTSquared{};
  } else if (noise == "rt") {
    dgp.noise = MultiRT{};
  } else {
    throw std::invalid_argument("unknown bivariate noise: " + noise);
  }
  return dgp;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names = {"wn-strong"};
  for (const char* noise : {"strong", "garch", "pt", "pt2", "rt"}) {
    names.push_back(std::string("arma11-") + noise);
    names.push_back(std::string("arma21-") + noise);
  }
  for (const char* noise : {"strong", "arch", "pt", "pt2", "rt"}) {
    names.push_back(std::string("varma11-") + noise);
  }
  names.push_back("varma21-strong");
  return names;
}

ExperimentPlan preset_plan(const std::string& name, const std::string& scale,
                           std::uint64_t seed) {
  ExperimentPlan plan;
  plan.seed = seed;
  plan.burnin = 1000;
  plan.alpha = 0.05;
  if (scale == "desk") {
    plan.replications = 200;
    plan.n_list = {500, 2000};
  } else if (scale == "full") {
    plan.replications = 1000;
    plan.n_list = {500, 2000, 10000};
  } else {
    throw std::invalid_argument("preset scale must be desk or full");
  }

  const auto dash = name.find('-');
  const std::string family = name.substr(0, dash);
  const std::string noise = dash == std::string::npos ? "" : name.substr(dash + 1);

  if (family == "wn") {
    plan.dgp.spec = VarmaSpec{1, 0, 0, {}};
    plan.dgp.theta = Eigen::VectorXd();
    plan.dgp.noise = StrongGaussian{Eigen::MatrixXd::Identity(1, 1)};
    plan.fit_spec = plan.dgp.spec;
    plan.m_list = {1, 2, 3, 6, 12};
    plan.mode = ExperimentMode::Size;
  } else if (family == "arma11") {
    plan.dgp = univariate_arma11(noise);
    plan.fit_spec = plan.dgp.spec;
    plan.m_list = {1, 2, 3, 6, 12};
    plan.mode = ExperimentMode::Size;
  } else if (family == "arma21") {
    plan.dgp = univariate_arma11(noise);
    plan.dgp.spec = VarmaSpec::full(1, 2, 1);
    plan.dgp.theta = Eigen::Vector3d{1.0, -0.2, -0.8};
    plan.fit_spec = VarmaSpec::full(1, 1, 1);
    plan.null_theta = Eigen::Vector2d{0.95, -0.6};
    plan.m_list = {1, 2, 3, 6, 12};
    plan.mode = ExperimentMode::RawPower;
  } else if (family == "varma11") {
    plan.dgp = bivariate_varma11(noise);
    plan.fit_spec = plan.dgp.spec;
    plan.m_list = {1, 2, 3, 4, 5};
    plan.mode = ExperimentMode::Size;
  } else if (family == "varma21") {
    plan.dgp = bivariate_varma11(noise);
    plan.dgp.spec = VarmaSpec::full(2, 2, 1);
    Eigen::VectorXd theta(12);
    // Row-major [A_1; A_2; B_1] with A_1 = [1.2 0.6; -0.5 0.3], A_2 = 0.1 I.
    theta << 1.2, 0.6, -0.5, 0.3, 0.1, 0.0, 0.0, 0.1, -0.6, 0.3, 0.3, 0.6;
    plan.dgp.theta = theta;
    plan.fit_spec = VarmaSpec::full(2, 1, 1);
    Eigen::VectorXd null_theta(8);
    null_theta << 1.2, -0.5, 0.6, 0.3, -0.6, 0.3, 0.3, 0.6;
    plan.null_theta = null_theta;
    plan.m_list = {1, 2, 3, 4, 5};
    plan.mode = ExperimentMode::RawPower;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  plan.validate();
  return plan;
}

}  // namespace weakarma
