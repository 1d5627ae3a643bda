#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "heisenbn/calibration.hpp"
#include "heisenbn/defect_model.hpp"
#include "heisenbn/error.hpp"
#include "heisenbn/evidence.hpp"
#include "heisenbn/fault_tree.hpp"
#include "heisenbn/network.hpp"

namespace heisenbn::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

struct ParseOptions {
  /// Reject fields the schema does not know about.
  bool strict = true;

  /// Strict unless HEISENBN_STRICT=0.
  static ParseOptions from_environment();
};

/// Throws SyntaxError with line and column in the message.
Json parse_json(std::string_view text);

/// Canonical text: two-space indent, keys in schema order, shortest
/// round-trip numbers, trailing newline.
std::string dump(const Json& doc);

/// Throws Io naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view text);

/// Escapes one reference token of a JSON pointer.
std::string pointer_token(std::string_view key);

// Model documents. A template block records the scenario and parameters a
// defect-model network was generated from; parsing checks that the nodes
// match what those inputs produce.

struct TemplateBlock {
  defect::ProjectScenario scenario;
  defect::DefectModelParams params;
  friend bool operator==(const TemplateBlock&, const TemplateBlock&) = default;
};

struct ModelDocument {
  Network network;
  std::optional<TemplateBlock> template_block;
};

Json model_to_json(const Network& net, const std::optional<TemplateBlock>& block = std::nullopt);
ModelDocument model_from_json(const Json& doc, const ParseOptions& options = {});
ModelDocument parse_model_document(std::string_view text, const ParseOptions& options = {});
Network parse_model(std::string_view text, const ParseOptions& options = {});
std::string serialize_model(const Network& net,
                            const std::optional<TemplateBlock>& block = std::nullopt);

// Evidence: {"node": {"state": "x"}} or {"node": {"soft": {"label": w}}}.
// Soft weights are emitted in the node's state order with zeros omitted.

Json evidence_to_json(const Network& net, const Evidence& ev);
Evidence evidence_from_json(const Json& doc, const Network& net, const ParseOptions& options = {});
Evidence parse_evidence(std::string_view text, const Network& net,
                        const ParseOptions& options = {});
std::string serialize_evidence(const Network& net, const Evidence& ev);

Json scenario_to_json(const defect::ProjectScenario& s, bool with_version = true);
defect::ProjectScenario scenario_from_json(const Json& doc, const ParseOptions& options = {},
                                           bool top_level = true);
defect::ProjectScenario parse_scenario(std::string_view text, const ParseOptions& options = {});
std::string serialize_scenario(const defect::ProjectScenario& s);

Json records_to_json(const std::vector<calibration::ProjectRecord>& records);
std::vector<calibration::ProjectRecord> records_from_json(const Json& doc,
                                                          const ParseOptions& options = {});
std::vector<calibration::ProjectRecord> parse_records(std::string_view text,
                                                      const ParseOptions& options = {});
std::string serialize_records(const std::vector<calibration::ProjectRecord>& records);

Json fault_tree_to_json(const FaultTree& tree);
FaultTree fault_tree_from_json(const Json& doc, const ParseOptions& options = {});
FaultTree parse_fault_tree_doc(std::string_view text, const ParseOptions& options = {});
std::string serialize_fault_tree(const FaultTree& tree);

/// Keys missing from a params document keep their template defaults.
Json params_to_json(const defect::DefectModelParams& params, bool with_version = true);
defect::DefectModelParams params_from_json(const Json& doc, const ParseOptions& options = {},
                                           bool top_level = true);
defect::DefectModelParams parse_params(std::string_view text, const ParseOptions& options = {});
std::string serialize_params(const defect::DefectModelParams& params);

Json priors_to_json(const calibration::Priors& priors);
calibration::Priors priors_from_json(const Json& doc, const ParseOptions& options = {});
calibration::Priors parse_priors(std::string_view text, const ParseOptions& options = {});
std::string serialize_priors(const calibration::Priors& priors);

Json rating_scales_to_json(const std::vector<defect::RatingScale>& scales);
std::vector<defect::RatingScale> rating_scales_from_json(const Json& doc,
                                                         const ParseOptions& options = {});
std::vector<defect::RatingScale> parse_rating_scales(std::string_view text,
                                                     const ParseOptions& options = {});
std::string serialize_rating_scales(const std::vector<defect::RatingScale>& scales);

/// Output only; non-finite numbers become null.
Json fit_report_to_json(const calibration::FitReport& report);

/// {"error": {"code", "message", "path"}}
Json error_to_json(const Error& e);

}  // namespace heisenbn::io
