#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heisenbn/calibration.hpp"
#include "heisenbn/defect_model.hpp"
#include "heisenbn/fault_tree.hpp"
#include "heisenbn/inference.hpp"
#include "heisenbn/io.hpp"
#include "heisenbn/sensitivity.hpp"

// Result documents shared by the command-line tool and the HTTP service, so
// both emit identical bytes for the same inputs.
namespace heisenbn::commands {

using io::Json;

Json marginal_to_json(const Marginal& m);
Json report_to_json(const PosteriorReport& report);

/// {"posteriors": [...]}
Json posteriors(const Network& net, const Evidence& ev, const std::vector<std::string>& targets);

/// Found and field defect marginals with their means.
Json predict(const defect::DefectNetwork& dn);

Json diagnose(const defect::DefectNetwork& dn, std::int64_t observed_found);

/// Every ancestor of the target, in network order.
std::vector<std::string> default_sensitivity_inputs(const Network& net, const std::string& target);

/// Empty `inputs` means default_sensitivity_inputs.
Json sensitivity(const Network& net, const Evidence& ev, const std::string& target,
                 std::vector<std::string> inputs = {});

Json fault_tree_top(const FaultTree& tree);
Json fault_tree_diagnose(const FaultTree& tree, const Evidence& observation);

/// Fit report document; params are nested under "params".
Json calibrate(const std::vector<calibration::ProjectRecord>& records,
               const calibration::Priors& priors, const defect::DefectModelParams& init,
               const calibration::FitOptions& options = {});

/// Means of `targets` with and without `overlay` applied on top of `base`
/// (null for labeled targets), plus the overlaid posteriors.
Json what_if(const Network& net, const Evidence& base, const Evidence& overlay,
             const std::vector<std::string>& targets);

/// Parses "a,b,c"; empty items are dropped.
std::vector<std::string> split_list(const std::string& text);

}  // namespace heisenbn::commands
