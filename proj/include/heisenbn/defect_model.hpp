#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heisenbn/evidence.hpp"
#include "heisenbn/inference.hpp"
#include "heisenbn/network.hpp"
#include "heisenbn/state_space.hpp"

namespace heisenbn::defect {

/// Version tag of the reference template; bump when the node set or the
/// meaning of a parameter changes.
inline constexpr std::string_view kTemplateVersion = "reference-template/1";

// Node ids of the reference template.
namespace node {
inline constexpr std::string_view kVerificationQuality = "verification_quality";
inline constexpr std::string_view kDevelopmentQuality = "development_quality";
inline constexpr std::string_view kProblemComplexity = "problem_complexity";
inline constexpr std::string_view kEffectiveKlocRank = "effective_kloc_rank";
inline constexpr std::string_view kHoursRank = "hours_rank";
inline constexpr std::string_view kProjectSize = "project_size";
inline constexpr std::string_view kCertification = "certification";
inline constexpr std::string_view kFieldUsage = "field_usage";
inline constexpr std::string_view kDefectsInserted = "defects_inserted";
inline constexpr std::string_view kDefectsFound = "defects_found_verification";
inline constexpr std::string_view kResidualDefects = "residual_defects";
inline constexpr std::string_view kFieldDefects = "field_defects";
}  // namespace node

inline constexpr std::string_view kNewFunctionalityComplexity = "new_functionality_complexity";

inline constexpr std::array<std::string_view, 5> kUsageLabels = {"None", "Low", "Medium",
                                                                  "High", "VeryHigh"};
inline constexpr std::array<std::string_view, 3> kCertificationLabels = {"No", "Later", "Yes"};

/// One questionnaire dimension and the aggregate node it feeds.
struct Dimension {
  std::string_view id;
  std::string_view aggregate;
  /// A higher answer pushes the aggregate down (e.g. stable requirements
  /// lower complexity).
  bool inverted = false;
};

/// Dimensions of the reference template, grouped by aggregate in node order.
const std::vector<Dimension>& dimensions();

/// All node ids of the reference template in declaration order.
std::vector<std::string> template_node_ids();

/// Five-level rating scale with one criterion text per level, VeryLow first.
struct RatingScale {
  std::string dimension;
  std::array<std::string, 5> criteria;
};

void validate(const RatingScale& scale);

/// Soft answer over the five levels VeryLow..VeryHigh.
struct Answer {
  std::string dimension;
  std::array<double, 5> distribution{};

  static Answer point(std::string dimension, std::size_t level);

  friend bool operator==(const Answer&, const Answer&) = default;
};

struct ProjectScenario {
  std::string name;
  /// One answer per template dimension except new_functionality_complexity,
  /// which is carried by `complexity`.
  std::vector<Answer> answers;
  double kloc = 0.0;
  Answer complexity{std::string(kNewFunctionalityComplexity), {0, 0, 1, 0, 0}};
  double hours_booked = 0.0;
  /// Distribution over kUsageLabels (None..VeryHigh).
  std::array<double, 5> usage{0, 0, 1, 0, 0};
  /// One of kCertificationLabels, or absent when unknown.
  std::optional<std::string> certification;
  int horizon_months = 12;

  friend bool operator==(const ProjectScenario&, const ProjectScenario&) = default;
};

/// Scenario with every answer a point mass on `level`.
ProjectScenario uniform_scenario(std::size_t level, double kloc, double hours_booked);

struct RankedParams {
  std::vector<double> weights;
  double variance = 0.01;
  friend bool operator==(const RankedParams&, const RankedParams&) = default;
};

/// Calibratable parameters of the reference template. Per-level arrays are
/// indexed VeryLow..VeryHigh (usage: None..VeryHigh; certification: No,
/// Later, Yes).
struct DefectModelParams {
  /// Defects inserted per effective KLoC, by development quality.
  std::array<double, 5> insertion_rates{8.0, 4.0, 2.0, 1.0, 0.5};
  /// Probability that verification finds a given defect, by verification quality.
  std::array<double, 5> detection{0.30, 0.50, 0.70, 0.85, 0.95};
  /// Added to the detection probability, by certification status.
  std::array<double, 3> certification_uplift{0.0, 0.01, 0.02};
  /// Probability that a residual defect is reported within 12 months, by usage.
  std::array<double, 5> manifestation{0.0, 0.05, 0.15, 0.30, 0.50};
  /// Effective KLoC per KLoC, by new-functionality complexity.
  std::array<double, 5> complexity_multipliers{0.5, 0.75, 1.0, 1.5, 2.5};
  /// Insertion multiplier by aggregate problem complexity.
  std::array<double, 5> complexity_factors{0.6, 0.8, 1.0, 1.3, 1.7};
  /// Insertion multiplier by project size.
  std::array<double, 5> size_factors{0.8, 0.9, 1.0, 1.1, 1.2};
  /// Upper bounds (exclusive) of the first four rank bins.
  std::array<double, 4> effective_kloc_thresholds{5.0, 20.0, 50.0, 150.0};
  std::array<double, 4> hours_thresholds{2000.0, 8000.0, 20000.0, 50000.0};
  /// Ranked CPD per aggregate node id; parents in template order.
  std::map<std::string, RankedParams> ranked = default_ranked();
  std::vector<CountInterval> count_intervals = default_count_intervals();
  double tail_factor = kDefaultTailFactor;

  static std::map<std::string, RankedParams> default_ranked();

  friend bool operator==(const DefectModelParams&, const DefectModelParams&) = default;
};

void validate(const DefectModelParams& params);
void validate(const ProjectScenario& scenario);

/// Per-usage-level probability that a residual defect shows up within the
/// horizon: 1 - (1 - p_12)^(T/12).
std::array<double, 5> manifestation_for_horizon(const DefectModelParams& params,
                                                int horizon_months);

/// Detection probability for a (verification level, certification index) pair.
double detection_probability(const DefectModelParams& params, std::size_t verification,
                             std::size_t certification);

/// Floor on the insertion rate; keeps zero KLoC well defined.
inline constexpr double kMinimumInsertionRate = 1e-9;

/// Poisson rate of defects_inserted for one parent configuration, floored
/// at kMinimumInsertionRate.
double insertion_rate(const DefectModelParams& params, double kloc, std::size_t complexity,
                      std::size_t problem_complexity, std::size_t development_quality,
                      std::size_t size);

/// Ranked CPD of an aggregate node (or project_size) under `params`,
/// including the inversion flags of its parents.
RankedCpd ranked_cpd(const DefectModelParams& params, std::string_view aggregate);

/// Rank bin (0..4) of `value` against ascending thresholds.
std::size_t rank_bin(double value, const std::array<double, 4>& thresholds);

struct DefectNetwork {
  Network network;
  Evidence evidence;
};

DefectNetwork build_defect_network(const ProjectScenario& scenario,
                                   const DefectModelParams& params);

struct SizeEstimate {
  /// (effective KLoC, probability) ascending, equal values merged.
  std::vector<std::pair<double, double>> effective_kloc;
  double mean_effective_kloc = 0.0;
  std::array<double, 5> effective_kloc_rank{};
  std::array<double, 5> hours_rank{};
  std::array<double, 5> project_size{};
};

SizeEstimate effective_size(double kloc, const Answer& complexity, double hours_booked,
                            const DefectModelParams& params);

struct Prediction {
  PosteriorReport report;  // defects_found_verification, field_defects
  Moments found;
  Moments field;
};

Prediction predict_defects(const ProjectScenario& scenario, const DefectModelParams& params);
/// Same query on a prepared network, e.g. one carrying extra evidence.
Prediction predict_defects(const DefectNetwork& dn);

/// Backward pass after observing the number of defects found in
/// verification. Reports the three quality aggregates, defects_inserted,
/// residual_defects and field_defects.
PosteriorReport diagnose_from_verification(const ProjectScenario& scenario,
                                           const DefectModelParams& params,
                                           std::int64_t observed_found);
PosteriorReport diagnose_from_verification(DefectNetwork dn, std::int64_t observed_found);

/// Targets reported by diagnose_from_verification, in order.
std::vector<std::string> diagnosis_targets();

}  // namespace heisenbn::defect
