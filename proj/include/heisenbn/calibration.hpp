#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heisenbn/defect_model.hpp"

namespace heisenbn::calibration {

using defect::DefectModelParams;
using defect::ProjectScenario;

struct ProjectRecord {
  ProjectScenario scenario;
  std::int64_t observed_found = 0;
  /// Absent while the first field year has not been observed.
  std::optional<std::int64_t> observed_field;

  friend bool operator==(const ProjectRecord&, const ProjectRecord&) = default;
};

void validate(const ProjectRecord& record);

struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
  friend bool operator==(const BetaPrior&, const BetaPrior&) = default;
};

/// Expert judgement entering the fit. By default every parameter gets a
/// prior with its mode at the initial value and weight `pseudo_count`:
/// Beta(1 + s*p0, 1 + s*(1 - p0)) for probabilities and
/// Gamma(1 + s, rate = s / r0) for insertion rates.
struct Priors {
  double pseudo_count = 1.0;
  /// Explicit Beta priors replacing the default, keyed "detection/<i>" or
  /// "manifestation/<i>".
  std::map<std::string, BetaPrior> beta;
  double rate_min = 0.05;
  double rate_max = 50.0;

  friend bool operator==(const Priors&, const Priors&) = default;
};

void validate(const Priors& priors);

/// Parameter groups that the optimizer is allowed to move.
struct FitOptions {
  bool fit_insertion = true;
  bool fit_detection = true;
  bool fit_manifestation = true;
  /// Coarse grid points per coordinate before the two refinements.
  std::size_t grid_points = 49;
  std::size_t max_sweeps = 8;
  /// Stop when a sweep improves the objective by less than this.
  double tolerance = 1e-7;
};

/// Identifies one scalar parameter, e.g. "detection/2".
struct ParameterDelta {
  std::string parameter;
  double before = 0.0;
  double after = 0.0;
};

struct RecordFit {
  std::string name;
  double log_likelihood_before = 0.0;
  double log_likelihood_after = 0.0;
};

struct FitReport {
  DefectModelParams params;
  double objective_before = 0.0;  // log-likelihood plus log-prior
  double objective_after = 0.0;
  double log_likelihood_before = 0.0;
  double log_likelihood_after = 0.0;
  std::vector<RecordFit> records;
  std::vector<ParameterDelta> deltas;
  std::size_t sweeps = 0;
  /// Set when no grid move improved the objective.
  bool non_improving = false;
};

FitReport fit_parameters(const std::vector<ProjectRecord>& records, const Priors& priors,
                         const DefectModelParams& init, const FitOptions& options = {});

/// log P(found = x, field = y | scenario) for one record under `params`.
/// The network fixes the distribution of defects_inserted and the quality
/// drivers; the exact counts are scored with the binomial thinning the
/// network discretizes, so counts inside the same interval still carry
/// information.
double record_log_likelihood(const ProjectRecord& record, const DefectModelParams& params);

/// Sum of record log-likelihoods plus the log-prior of the fitted groups.
double penalized_log_likelihood(const std::vector<ProjectRecord>& records,
                                const Priors& priors, const DefectModelParams& init,
                                const DefectModelParams& params, const FitOptions& options = {});

/// States of the latent nodes drawn while synthesizing one record.
struct LatentDraw {
  std::size_t verification_quality = 0;
  std::size_t development_quality = 0;
  std::size_t certification = 0;
  std::size_t usage = 0;
  std::size_t inserted_interval = 0;
};

struct SynthesisOptions {
  /// KLoC is drawn log-uniformly from this range.
  double kloc_min = 2.0;
  double kloc_max = 200.0;
  /// Force every record to this usage level.
  std::optional<std::size_t> usage;
  /// Reuse one scenario for every record instead of drawing answers.
  std::optional<ProjectScenario> scenario;
};

/// Scenarios with uniformly drawn point answers, then counts drawn
/// ancestrally through the discretized network. The same seed gives the
/// same records. `latent`, when given, receives one entry per record.
std::vector<ProjectRecord> synthesize_records(const DefectModelParams& truth,
                                              std::uint64_t seed, std::size_t n,
                                              const SynthesisOptions& options = {},
                                              std::vector<LatentDraw>* latent = nullptr);

}  // namespace heisenbn::calibration
