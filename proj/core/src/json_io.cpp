#include "weakarma/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace weakarma {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols) {
      throw std::invalid_argument("json matrix: ragged rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

json spec_to_json_obj(const VarmaSpec& spec) {
  json mask = json::array();
  for (const auto& entry : spec.mask) {
    if (entry.kind == MaskEntry::Kind::Free) {
      mask.push_back(json::array({"free", entry.index}));
    } else {
      mask.push_back(json::array({"fixed", entry.value}));
    }
  }
  return json{{"d", spec.d}, {"p", spec.p}, {"q", spec.q}, {"mask", std::move(mask)}};
}

VarmaSpec spec_from_json_obj(const json& j) {
  VarmaSpec spec;
  spec.d = j.at("d").get<int>();
  spec.p = j.at("p").get<int>();
  spec.q = j.at("q").get<int>();
  for (const auto& entry : j.at("mask")) {
    const std::string tag = entry.at(0).get<std::string>();
    if (tag == "free") {
      spec.mask.push_back(MaskEntry::free(entry.at(1).get<int>()));
    } else if (tag == "fixed") {
      spec.mask.push_back(MaskEntry::fixed(entry.at(1).get<double>()));
    } else {
      throw std::invalid_argument("spec mask entry must be 'free' or 'fixed'");
    }
  }
  spec.validate();
  return spec;
}

json noise_to_json_obj(const NoiseKind& kind) {
  if (const auto* k = std::get_if<StrongGaussian>(&kind)) {
    return json{{"kind", "strong_gaussian"}, {"sigma", matrix_to_json(k->sigma)}};
  }
  if (const auto* k = std::get_if<Garch11>(&kind)) {
    return json{{"kind", "garch11"},
                {"omega", k->omega},
                {"alpha1", k->alpha1},
                {"beta1", k->beta1}};
  }
  if (std::holds_alternative<ProductPT>(kind)) return json{{"kind", "product_pt"}};
  if (std::holds_alternative<ProductPTSquared>(kind)) {
    return json{{"kind", "product_pt_squared"}};
  }
  if (std::holds_alternative<RatioRT>(kind)) return json{{"kind", "ratio_rt"}};
  if (const auto* k = std::get_if<BiArch1>(&kind)) {
    return json{{"kind", "bi_arch1"},
                {"omega", json::array({k->omega(0), k->omega(1)})},
                {"a", matrix_to_json(k->a)}};
  }
  if (std::holds_alternative<MultiPT>(kind)) return json{{"kind", "multi_pt"}};
  if (std::holds_alternative<MultiPTSquared>(kind)) {
    return json{{"kind", "multi_pt_squared"}};
  }
  return json{{"kind", "multi_rt"}};
}

NoiseKind noise_from_json_obj(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "strong_gaussian") {
    StrongGaussian k;
    if (j.contains("sigma")) k.sigma = matrix_from_json(j.at("sigma"));
    return k;
  }
  if (kind == "garch11") {
    Garch11 k;
    k.omega = j.value("omega", 1.0);
    k.alpha1 = j.value("alpha1", 0.0);
    k.beta1 = j.value("beta1", 0.0);
    return k;
  }
  if (kind == "product_pt") return ProductPT{};
  if (kind == "product_pt_squared") return ProductPTSquared{};
  if (kind == "ratio_rt") return RatioRT{};
  if (kind == "bi_arch1") {
    BiArch1 k;
    if (j.contains("omega")) {
      k.omega(0) = j.at("omega").at(0).get<double>();
      k.omega(1) = j.at("omega").at(1).get<double>();
    }
    if (j.contains("a")) k.a = matrix_from_json(j.at("a"));
    return k;
  }
  if (kind == "multi_pt") return MultiPT{};
  if (kind == "multi_pt_squared") return MultiPTSquared{};
  if (kind == "multi_rt") return MultiRT{};
  throw std::invalid_argument("unknown noise kind: " + kind);
}

json optional_double(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string mode_label(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::Size: return "size";
    case ExperimentMode::RawPower: return "raw_power";
    case ExperimentMode::SizeAdjustedPower: return "adjusted_power";
  }
  return "?";
}

ExperimentMode mode_from_label(const std::string& label) {
  if (label == "size") return ExperimentMode::Size;
  if (label == "raw_power") return ExperimentMode::RawPower;
  if (label == "adjusted_power") return ExperimentMode::SizeAdjustedPower;
  throw std::invalid_argument("unknown mode: " + label);
}

}  // namespace

std::string spec_to_json(const VarmaSpec& spec) {
  return spec_to_json_obj(spec).dump(2);
}

VarmaSpec spec_from_json(const std::string& text) {
  return spec_from_json_obj(json::parse(text));
}

std::string noise_to_json(const NoiseKind& kind) {
  return noise_to_json_obj(kind).dump(2);
}

NoiseKind noise_from_json(const std::string& text) {
  return noise_from_json_obj(json::parse(text));
}

std::string fit_to_json(const ParamEstimate& fit) {
  json j{{"theta_hat", vector_to_json(fit.theta_hat)},
         {"sigma_e_hat", matrix_to_json(fit.sigma_e_hat)},
         {"objective_value", fit.objective_value},
         {"n_iterations", fit.n_iterations},
         {"converged", fit.converged},
         {"gradient_norm", fit.gradient_norm}};
  return j.dump(2);
}

ParamEstimate fit_from_json(const std::string& text) {
  const json j = json::parse(text);
  ParamEstimate fit;
  fit.theta_hat = vector_from_json(j.at("theta_hat"));
  fit.sigma_e_hat = matrix_from_json(j.at("sigma_e_hat"));
  fit.objective_value = j.at("objective_value").get<double>();
  fit.n_iterations = j.at("n_iterations").get<int>();
  fit.converged = j.at("converged").get<bool>();
  fit.gradient_norm = j.at("gradient_norm").get<double>();
  return fit;
}

std::string plan_to_json(const ExperimentPlan& plan) {
  json j{{"dgp",
          json{{"spec", spec_to_json_obj(plan.dgp.spec)},
               {"theta", vector_to_json(plan.dgp.theta)},
               {"noise", noise_to_json_obj(plan.dgp.noise)}}},
         {"fit_spec", spec_to_json_obj(plan.fit_spec)},
         {"n_list", plan.n_list},
         {"m_list", plan.m_list},
         {"replications", plan.replications},
         {"alpha", plan.alpha},
         {"mode", mode_label(plan.mode)},
         {"seed", plan.seed},
         {"burnin", plan.burnin}};
  if (plan.null_theta) j["null_theta"] = vector_to_json(*plan.null_theta);
  return j.dump(2);
}

ExperimentPlan plan_from_json(const std::string& text) {
  const json j = json::parse(text);
  ExperimentPlan plan;
  plan.dgp.spec = spec_from_json_obj(j.at("dgp").at("spec"));
  plan.dgp.theta = vector_from_json(j.at("dgp").at("theta"));
  plan.dgp.noise = noise_from_json_obj(j.at("dgp").at("noise"));
  plan.fit_spec = spec_from_json_obj(j.at("fit_spec"));
  if (j.contains("null_theta") && !j.at("null_theta").is_null()) {
    plan.null_theta = vector_from_json(j.at("null_theta"));
  }
  plan.n_list = j.at("n_list").get<std::vector<int>>();
  plan.m_list = j.at("m_list").get<std::vector<int>>();
  plan.replications = j.at("replications").get<int>();
  plan.alpha = j.at("alpha").get<double>();
  plan.mode = mode_from_label(j.at("mode").get<std::string>());
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.burnin = j.value("burnin", 1000);
  plan.validate();
  return plan;
}

std::string report_to_json(const DiagnosticReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r{{"m", row.m},
           {"q_sn", finite_or_null(row.q_sn)},
           {"q_sn_tilde", finite_or_null(row.q_sn_tilde)},
           {"q_bp", finite_or_null(row.q_bp)},
           {"q_lb", finite_or_null(row.q_lb)},
           {"df_chi2", row.df_chi2 ? json(*row.df_chi2) : json(nullptr)},
           {"p_sn", optional_double(row.p_sn)},
           {"p_sn_tilde", optional_double(row.p_sn_tilde)},
           {"p_chi2_bp", optional_double(row.p_chi2_bp)},
           {"p_chi2_lb", optional_double(row.p_chi2_lb)},
           {"rho", row.rho_lag},
           {"error", row.error ? json(*row.error) : json(nullptr)}};
    if (report.d > 1) {
      r["q_c"] = finite_or_null(row.q_c);
      r["q_h"] = finite_or_null(row.q_h);
    }
    rows.push_back(std::move(r));
  }
  json j{{"d", report.d}, {"n", report.n}, {"k0", report.k0}, {"rows", std::move(rows)}};
  return j.dump(2);
}

std::string report_to_markdown(const DiagnosticReport& report) {
  std::ostringstream os;
  auto cell = [](double v) {
    if (!std::isfinite(v)) return std::string("n.a.");
    std::ostringstream c;
    c.precision(5);
    c << v;
    return c.str();
  };
  auto pcell = [&](const std::optional<double>& v) {
    return v ? cell(*v) : std::string("n.a.");
  };
  os << "| lag m |";
  for (const auto& row : report.rows) os << ' ' << row.m << " |";
  os << '\n' << "|---|";
  for (std::size_t i = 0; i < report.rows.size(); ++i) os << "---|";
  os << '\n';
  if (report.d == 1) {
    os << "| rho(m) |";
    for (const auto& row : report.rows) {
      os << ' ' << (row.rho_lag.empty() ? std::string("n.a.") : cell(row.rho_lag[0]))
         << " |";
    }
    os << '\n';
  }
  os << "| LB_SN |";
  for (const auto& row : report.rows) os << ' ' << cell(row.q_sn_tilde) << " |";
  os << '\n' << "| BP_SN |";
  for (const auto& row : report.rows) os << ' ' << cell(row.q_sn) << " |";
  os << '\n';
  if (report.d == 1) {
    os << "| LB_S |";
    for (const auto& row : report.rows) os << ' ' << cell(row.q_lb) << " |";
    os << '\n' << "| BP_S |";
    for (const auto& row : report.rows) os << ' ' << cell(row.q_bp) << " |";
    os << '\n';
  } else {
    os << "| LB_S |";
    for (const auto& row : report.rows) os << ' ' << cell(row.q_h) << " |";
    os << '\n' << "| BP_S |";
    for (const auto& row : report.rows) os << ' ' << cell(row.q_c) << " |";
    os << '\n';
  }
  os << "| p_sn_lb |";
  for (const auto& row : report.rows) os << ' ' << pcell(row.p_sn_tilde) << " |";
  os << '\n' << "| p_sn_bp |";
  for (const auto& row : report.rows) os << ' ' << pcell(row.p_sn) << " |";
  os << '\n' << "| p_s_lb |";
  for (const auto& row : report.rows) os << ' ' << pcell(row.p_chi2_lb) << " |";
  os << '\n' << "| p_s_bp |";
  for (const auto& row : report.rows) os << ' ' << pcell(row.p_chi2_bp) << " |";
  os << '\n';
  bool any_error = false;
  for (const auto& row : report.rows) any_error = any_error || row.error.has_value();
  if (any_error) {
    os << '\n';
    for (const auto& row : report.rows) {
      if (row.error) os << "m=" << row.m << ": " << *row.error << '\n';
    }
  }
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace weakarma
