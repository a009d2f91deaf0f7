// Command line front end: simulation of weak-noise (V)ARMA series,
// quasi-maximum-likelihood fitting, self-normalized portmanteau
// diagnostics, critical-value tabulation and the Monte Carlo harness.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "weakarma/analyze.hpp"
#include "weakarma/csv.hpp"
#include "weakarma/dist.hpp"
#include "weakarma/estimate.hpp"
#include "weakarma/experiments.hpp"
#include "weakarma/json_io.hpp"
#include "weakarma/selfnorm.hpp"
#include "weakarma/simulate.hpp"
#include "weakarma/varma.hpp"

namespace {

using namespace weakarma;

std::vector<int> parse_int_list(const std::string& text) {
  // "1,2,3" or "1..20"
  std::vector<int> out;
  const auto range = text.find("..");
  if (range != std::string::npos) {
    const int lo = std::stoi(text.substr(0, range));
    const int hi = std::stoi(text.substr(range + 2));
    for (int k = lo; k <= hi; ++k) out.push_back(k);
    return out;
  }
  std::istringstream is(text);
  std::string field;
  while (std::getline(is, field, ',')) {
    if (!field.empty()) out.push_back(std::stoi(field));
  }
  return out;
}

Eigen::VectorXd parse_double_list(const std::string& text) {
  std::vector<double> values;
  std::istringstream is(text);
  std::string field;
  while (std::getline(is, field, ',')) {
    if (!field.empty()) values.push_back(std::stod(field));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = values[static_cast<std::size_t>(i)];
  }
  return out;
}

std::string resolve_table_path(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("WEAKARMA_TABLE")) return env;
  throw std::runtime_error(
      "no quantile table given: pass --table or set WEAKARMA_TABLE "
      "(create one with 'weakarma tabulate')");
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(out_path, content);
  }
}

std::string infer_format(const std::string& format, const std::string& out_path,
                         const std::string& fallback) {
  if (!format.empty()) return format;
  const auto dot = out_path.rfind('.');
  if (dot != std::string::npos) {
    const std::string ext = out_path.substr(dot + 1);
    if (ext == "md" || ext == "json" || ext == "csv") return ext;
  }
  return fallback;
}

std::vector<int> default_m_list(int d) {
  return d == 1 ? std::vector<int>{1, 2, 3, 6, 12} : std::vector<int>{1, 2, 3, 4, 5};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "weakarma: portmanteau goodness-of-fit tests for ARMA/VARMA models "
      "with uncorrelated but possibly dependent innovations"};
  app.require_subcommand(1);

  std::uint64_t seed = 20240901;
  int threads = 0;
  std::string out_path = "-";
  std::string format;
  std::string table_path;
  app.add_option("--seed", seed, "RNG seed (all commands are reproducible)")
      ->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = hardware)")
      ->capture_default_str();
  app.add_option("--out", out_path, "output file ('-' = stdout)")
      ->capture_default_str();
  app.add_option("--format", format, "output format: csv|md|json");
  app.fallthrough();

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "simulate a (V)ARMA series");
  std::string sim_model, sim_noise, sim_theta;
  int sim_n = 1000, sim_burnin = 1000;
  cmd_sim->add_option("--model", sim_model, "model spec JSON")->required();
  cmd_sim->add_option("--noise", sim_noise, "noise kind JSON")->required();
  cmd_sim->add_option("--n", sim_n, "series length")->required();
  cmd_sim->add_option("--burnin", sim_burnin, "burn-in length")->capture_default_str();
  cmd_sim->add_option("--theta", sim_theta,
                      "free parameter values, comma separated (default zeros)");

  // fit
  auto* cmd_fit = app.add_subcommand("fit", "quasi-maximum-likelihood fit");
  std::string fit_model, fit_data, fit_init;
  cmd_fit->add_option("--model", fit_model, "model spec JSON")->required();
  cmd_fit->add_option("--data", fit_data, "series CSV")->required();
  cmd_fit->add_option("--init", fit_init, "starting values, comma separated");

  // test
  auto* cmd_test = app.add_subcommand("test", "residual portmanteau diagnostics");
  std::string test_model, test_fit, test_data, test_m;
  cmd_test->add_option("--model", test_model, "model spec JSON")->required();
  cmd_test->add_option("--fit", test_fit, "fit JSON (from 'fit')")->required();
  cmd_test->add_option("--data", test_data, "series CSV")->required();
  cmd_test->add_option("--m", test_m, "lags, e.g. 1,2,3,6,12");
  cmd_test->add_option("--table", table_path, "quantile table (or WEAKARMA_TABLE)");

  // tabulate
  auto* cmd_tab = app.add_subcommand(
      "tabulate", "Monte Carlo table of the self-normalized limit law");
  std::string tab_k = "1..20";
  std::uint64_t tab_r = 100000;
  int tab_steps = 2000;
  cmd_tab->add_option("--K", tab_k, "K values, e.g. 1..20 or 1,4,12")
      ->capture_default_str();
  cmd_tab->add_option("--R", tab_r, "replications per K")->capture_default_str();
  cmd_tab->add_option("--steps", tab_steps, "grid steps per Brownian path")
      ->capture_default_str();

  // mc-size / mc-power
  auto* cmd_size = app.add_subcommand("mc-size", "empirical size experiment");
  auto* cmd_power = app.add_subcommand("mc-power", "empirical power experiment");
  std::string size_plan, size_preset, size_scale = "desk";
  std::string power_plan, power_preset, power_scale = "desk", power_mode = "raw";
  for (auto* cmd : {cmd_size, cmd_power}) {
    auto& plan = (cmd == cmd_size) ? size_plan : power_plan;
    auto& preset = (cmd == cmd_size) ? size_preset : power_preset;
    auto& scale = (cmd == cmd_size) ? size_scale : power_scale;
    cmd->add_option("--plan", plan, "experiment plan JSON");
    cmd->add_option("--preset", preset, "built-in plan (see --list-presets)");
    cmd->add_option("--scale", scale, "preset scale: desk|full")->capture_default_str();
    cmd->add_option("--table", table_path, "quantile table (or WEAKARMA_TABLE)");
  }
  cmd_power->add_option("--mode", power_mode, "raw|adjusted")->capture_default_str();
  bool list_presets = false;
  cmd_size->add_flag("--list-presets", list_presets, "print preset names and exit");

  // analyze
  auto* cmd_analyze =
      app.add_subcommand("analyze", "white-noise / ARMA(1,1) tests on price data");
  std::string an_input, an_column = "close", an_transform = "returns", an_m;
  double an_alpha = 0.05;
  cmd_analyze->add_option("--input", an_input, "price CSV")->required();
  cmd_analyze->add_option("--column", an_column, "price column name")
      ->capture_default_str();
  cmd_analyze->add_option("--transform", an_transform,
                          "returns | squared-returns")
      ->capture_default_str();
  cmd_analyze->add_option("--m", an_m, "lags, e.g. 1,2,3,6,12");
  cmd_analyze->add_option("--alpha", an_alpha, "nominal level")->capture_default_str();
  cmd_analyze->add_option("--table", table_path, "quantile table (or WEAKARMA_TABLE)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_sim->parsed()) {
      const VarmaSpec spec = spec_from_json(read_text_file(sim_model));
      const NoiseKind noise = noise_from_json(read_text_file(sim_noise));
      Eigen::VectorXd theta = Eigen::VectorXd::Zero(spec.k0());
      if (!sim_theta.empty()) theta = parse_double_list(sim_theta);
      RngStream rng(seed, 0);
      const TimeSeries x = simulate_varma(spec, theta, noise, sim_n, sim_burnin, rng);
      std::vector<std::string> names;
      for (int c = 0; c < spec.d; ++c) names.push_back("x" + std::to_string(c + 1));
      if (out_path.empty() || out_path == "-") {
        throw std::runtime_error("simulate: --out must be a file path");
      }
      write_csv(out_path, x, names);
    } else if (cmd_fit->parsed()) {
      const VarmaSpec spec = spec_from_json(read_text_file(fit_model));
      const LoadedCsv csv = load_csv(fit_data);
      if (csv.dropped_rows > 0) {
        std::cerr << "warning: dropped " << csv.dropped_rows
                  << " rows with missing values\n";
      }
      std::optional<Eigen::VectorXd> init;
      if (!fit_init.empty()) init = parse_double_list(fit_init);
      const ParamEstimate fit = qmle_fit(spec, csv.data, init);
      if (!fit.converged) {
        std::cerr << "warning: optimizer did not converge (gradient norm "
                  << fit.gradient_norm << ")\n";
      }
      emit(out_path, fit_to_json(fit));
    } else if (cmd_test->parsed()) {
      const VarmaSpec spec = spec_from_json(read_text_file(test_model));
      const ParamEstimate fit = fit_from_json(read_text_file(test_fit));
      const LoadedCsv csv = load_csv(test_data);
      const QuantileTable table = load_table(resolve_table_path(table_path));
      const std::vector<int> m_list =
          test_m.empty() ? default_m_list(spec.d) : parse_int_list(test_m);
      const DiagnosticReport report =
          run_diagnostics(spec, fit, csv.data, m_list, table);
      const std::string fmt = infer_format(format, out_path, "json");
      emit(out_path, fmt == "md" ? report_to_markdown(report) : report_to_json(report));
    } else if (cmd_tab->parsed()) {
      const std::vector<int> k_values = parse_int_list(tab_k);
      const QuantileTable table =
          tabulate_table(k_values, tab_r, tab_steps, seed, threads);
      if (out_path.empty() || out_path == "-") {
        throw std::runtime_error("tabulate: --out must be a file path");
      }
      save_table(table, out_path);
      std::uint64_t resamples = 0;
      for (const auto& [k, entry] : table.samples) resamples += entry.resamples;
      std::cerr << "tabulated K={" << tab_k << "} with R=" << tab_r
                << ", steps=" << tab_steps << ", resampled draws: " << resamples
                << '\n';
    } else if (cmd_size->parsed() || cmd_power->parsed()) {
      if (list_presets) {
        for (const auto& name : preset_names()) std::cout << name << '\n';
        return 0;
      }
      const bool is_power = cmd_power->parsed();
      const std::string& plan_path = is_power ? power_plan : size_plan;
      const std::string& preset = is_power ? power_preset : size_preset;
      const std::string& scale = is_power ? power_scale : size_scale;
      ExperimentPlan plan;
      if (!plan_path.empty()) {
        plan = plan_from_json(read_text_file(plan_path));
      } else if (!preset.empty()) {
        plan = preset_plan(preset, scale, seed);
      } else {
        throw std::runtime_error("give --plan or --preset");
      }
      if (is_power) {
        plan.mode = (power_mode == "adjusted") ? ExperimentMode::SizeAdjustedPower
                                               : ExperimentMode::RawPower;
      } else {
        plan.mode = ExperimentMode::Size;
      }
      const QuantileTable table = load_table(resolve_table_path(table_path));
      const FrequencyTable result = is_power ? run_power(plan, table, threads)
                                             : run_size(plan, table, threads);
      const std::string fmt = infer_format(format, out_path, "csv");
      emit(out_path, emit_table(result, fmt));
    } else if (cmd_analyze->parsed()) {
      ReturnsPipelineConfig config;
      config.input_path = an_input;
      config.price_column = an_column;
      if (an_transform == "returns") {
        config.transform = ReturnsTransform::LogReturns;
      } else if (an_transform == "squared-returns") {
        config.transform = ReturnsTransform::SquaredLogReturnsMeanCorrected;
      } else {
        throw std::runtime_error("--transform must be returns or squared-returns");
      }
      if (!an_m.empty()) config.m_list = parse_int_list(an_m);
      config.alpha = an_alpha;
      const QuantileTable table = load_table(resolve_table_path(table_path));
      const AnalysisResult result = analyze_returns(config, table);
      const std::string fmt = infer_format(format, out_path, "json");
      if (fmt == "md") {
        std::string text = report_to_markdown(result.report);
        if (result.fit) {
          std::ostringstream extra;
          extra << "\nFitted ARMA(1,1) on centred squared returns: a="
                << result.fit->theta_hat(0) << ", b=" << result.fit->theta_hat(1)
                << ", var(e)=" << result.fit->sigma_e_hat(0, 0) << '\n';
          text += extra.str();
        }
        emit(out_path, text);
      } else {
        std::string text = report_to_json(result.report);
        if (result.fit) {
          text += "\n";
          text += fit_to_json(*result.fit);
        }
        emit(out_path, text);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
