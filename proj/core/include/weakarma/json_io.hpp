#pragma once

#include <string>

#include "weakarma/analyze.hpp"
#include "weakarma/estimate.hpp"
#include "weakarma/experiments.hpp"
#include "weakarma/selfnorm.hpp"
#include "weakarma/simulate.hpp"
#include "weakarma/varma.hpp"

namespace weakarma {

// JSON codecs for the file formats consumed and produced by the CLI.
// Specs: {"d":..,"p":..,"q":..,"mask":[["free",i]|["fixed",v],...]} with the
// mask in row-major order over [A_1..A_p B_1..B_q]. Noise kinds are tagged
// objects, e.g. {"kind":"garch11","omega":1.0,"alpha1":0.1,"beta1":0.85}.

std::string spec_to_json(const VarmaSpec& spec);
VarmaSpec spec_from_json(const std::string& text);

std::string noise_to_json(const NoiseKind& kind);
NoiseKind noise_from_json(const std::string& text);

std::string fit_to_json(const ParamEstimate& fit);
ParamEstimate fit_from_json(const std::string& text);

std::string plan_to_json(const ExperimentPlan& plan);
ExperimentPlan plan_from_json(const std::string& text);

std::string report_to_json(const DiagnosticReport& report);

/// Report table: one column per lag, rows for the autocorrelation, the
/// statistics and the p-values.
std::string report_to_markdown(const DiagnosticReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace weakarma
