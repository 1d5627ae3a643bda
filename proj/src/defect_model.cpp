#include "heisenbn/defect_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "heisenbn/error.hpp"
#include "heisenbn/gates.hpp"

namespace heisenbn::defect {

namespace {

constexpr std::size_t kLevels = 5;

std::string str(std::string_view s) { return std::string(s); }


TableCpd uniform_prior(std::size_t n) {
  return TableCpd{{std::vector<double>(n, 1.0 / static_cast<double>(n))}};
}

std::vector<std::string_view> aggregate_parents(std::string_view aggregate) {
  std::vector<std::string_view> out;
  for (const auto& d : dimensions()) {
    if (d.aggregate == aggregate) out.push_back(d.id);
  }
  return out;
}

void check_distribution(std::span<const double> values, const std::string& path) {
  double sum = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::SchemaMismatch, "answer weights must be nonnegative", path);
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::SchemaMismatch, "answer weights must sum to 1", path);
  }
}

void check_probabilities(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::ParameterOutOfRange, std::string(what) + " outside [0,1]", what);
    }
  }
}

void check_positive(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::ParameterOutOfRange, std::string(what) + " must be > 0", what);
    }
  }
}

void check_ascending(const std::array<double, 4>& t, const char* what) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || (i > 0 && !(t[i] > t[i - 1]))) {
      throw Error(ErrorCode::ParameterOutOfRange, std::string(what) + " must be ascending",
                  what);
    }
  }
}

std::vector<double> as_vector(std::span<const double> a) { return {a.begin(), a.end()}; }

}  // namespace

const std::vector<Dimension>& dimensions() {
  static const std::vector<Dimension> dims = {
      {"testing_quality", node::kVerificationQuality, false},
      {"review_quality", node::kVerificationQuality, false},
      {"verification_type", node::kVerificationQuality, false},
      {"team_experience", node::kDevelopmentQuality, false},
      {"project_management", node::kDevelopmentQuality, false},
      {"process_maturity", node::kDevelopmentQuality, false},
      {"tool_quality", node::kDevelopmentQuality, false},
      {kNewFunctionalityComplexity, node::kProblemComplexity, false},
      {"requirements_stability", node::kProblemComplexity, true},
      {"domain_novelty", node::kProblemComplexity, false},
  };
  return dims;
}

std::vector<std::string> template_node_ids() {
  std::vector<std::string> ids;
  for (const auto& d : dimensions()) ids.emplace_back(d.id);
  for (auto id : {node::kVerificationQuality, node::kDevelopmentQuality, node::kProblemComplexity,
                  node::kCertification, node::kFieldUsage, node::kHoursRank,
                  node::kEffectiveKlocRank, node::kProjectSize, node::kDefectsInserted,
                  node::kDefectsFound, node::kResidualDefects, node::kFieldDefects}) {
    ids.emplace_back(id);
  }
  return ids;
}

void validate(const RatingScale& scale) {
  if (scale.dimension.empty()) {
    throw Error(ErrorCode::SchemaMismatch, "rating scale has no dimension id");
  }
  for (std::size_t i = 0; i < scale.criteria.size(); ++i) {
    if (scale.criteria[i].empty()) {
      throw Error(ErrorCode::SchemaMismatch,
                  "empty criteria text for level " + std::string(kRankLabels[i]),
                  scale.dimension);
    }
  }
}

Answer Answer::point(std::string dimension, std::size_t level) {
  Answer a{std::move(dimension), {}};
  a.distribution.at(level) = 1.0;
  return a;
}

ProjectScenario uniform_scenario(std::size_t level, double kloc, double hours_booked) {
  ProjectScenario s;
  s.name = "uniform-" + std::string(kRankLabels[level]);
  for (const auto& d : dimensions()) {
    if (d.id == kNewFunctionalityComplexity) continue;
    s.answers.push_back(Answer::point(str(d.id), level));
  }
  s.complexity = Answer::point(str(kNewFunctionalityComplexity), level);
  s.kloc = kloc;
  s.hours_booked = hours_booked;
  return s;
}

std::map<std::string, RankedParams> DefectModelParams::default_ranked() {
  return {
      {str(node::kVerificationQuality), {{2.0, 1.0, 1.0}, 0.01}},
      {str(node::kDevelopmentQuality), {{1.0, 1.0, 1.0, 1.0}, 0.01}},
      {str(node::kProblemComplexity), {{2.0, 1.0, 1.0}, 0.01}},
      {str(node::kProjectSize), {{2.0, 1.0}, 0.01}},
  };
}

void validate(const DefectModelParams& p) {
  check_positive(p.insertion_rates, "insertion_rates");
  check_probabilities(p.detection, "detection");
  for (double u : p.certification_uplift) {
    if (!(u >= -1.0 && u <= 1.0)) {
      throw Error(ErrorCode::ParameterOutOfRange, "certification uplift outside [-1,1]",
                  "certification_uplift");
    }
  }
  check_probabilities(p.manifestation, "manifestation");
  if (p.manifestation[0] != 0.0) {
    throw Error(ErrorCode::ParameterOutOfRange,
                "manifestation probability for usage None must be 0", "manifestation");
  }
  check_positive(p.complexity_multipliers, "complexity_multipliers");
  check_positive(p.complexity_factors, "complexity_factors");
  check_positive(p.size_factors, "size_factors");
  check_ascending(p.effective_kloc_thresholds, "effective_kloc_thresholds");
  check_ascending(p.hours_thresholds, "hours_thresholds");

  const std::map<std::string, std::size_t> arity = {
      {str(node::kVerificationQuality), aggregate_parents(node::kVerificationQuality).size()},
      {str(node::kDevelopmentQuality), aggregate_parents(node::kDevelopmentQuality).size()},
      {str(node::kProblemComplexity), aggregate_parents(node::kProblemComplexity).size()},
      {str(node::kProjectSize), 2},
  };
  for (const auto& [id, n] : arity) {
    auto it = p.ranked.find(id);
    if (it == p.ranked.end()) {
      throw Error(ErrorCode::MissingDimension, "no ranked parameters for '" + id + "'", id);
    }
    if (it->second.weights.size() != n) {
      throw Error(ErrorCode::CpdShapeMismatch,
                  "'" + id + "' needs " + std::to_string(n) + " weights", id);
    }
  }
  for (const auto& [id, rp] : p.ranked) {
    if (!arity.count(id)) {
      throw Error(ErrorCode::SchemaMismatch, "unknown ranked node '" + id + "'", id);
    }
    if (!(rp.variance > 0.0)) {
      throw Error(ErrorCode::ParameterOutOfRange, "ranked variance must be > 0", id);
    }
    double total = 0.0;
    for (double w : rp.weights) {
      if (!(w >= 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "weights must be >= 0", id);
      total += w;
    }
    if (!(total > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "weights are all zero", id);
  }

  const auto space = StateSpace::counts(p.count_intervals, p.tail_factor);
  if (p.count_intervals.front().lower != 0 || p.count_intervals.back().bounded()) {
    throw Error(ErrorCode::IncompatibleIntervals,
                "count intervals must start at 0 and end unbounded", "count_intervals");
  }
}

void validate(const ProjectScenario& s) {
  std::map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < s.answers.size(); ++i) {
    const auto& a = s.answers[i];
    const std::string path = "/answers/" + std::to_string(i);
    const auto& dims = dimensions();
    auto it = std::find_if(dims.begin(), dims.end(),
                           [&](const Dimension& d) { return d.id == a.dimension; });
    if (it == dims.end() || it->id == kNewFunctionalityComplexity) {
      throw Error(ErrorCode::SchemaMismatch, "unexpected dimension '" + a.dimension + "'", path);
    }
    if (!seen.emplace(it->id, i).second) {
      throw Error(ErrorCode::SchemaMismatch, "dimension '" + a.dimension + "' answered twice",
                  path);
    }
    check_distribution(a.distribution, path + "/distribution");
  }
  for (const auto& d : dimensions()) {
    if (d.id == kNewFunctionalityComplexity) continue;
    if (!seen.count(d.id)) {
      throw Error(ErrorCode::MissingDimension, "no answer for '" + str(d.id) + "'", "/answers");
    }
  }
  if (s.complexity.dimension != kNewFunctionalityComplexity) {
    throw Error(ErrorCode::SchemaMismatch,
                "complexity answer must address " + str(kNewFunctionalityComplexity),
                "/complexity");
  }
  check_distribution(s.complexity.distribution, "/complexity/distribution");
  check_distribution(s.usage, "/usage");
  if (!(s.kloc >= 0.0) || !std::isfinite(s.kloc)) {
    throw Error(ErrorCode::NegativeInput, "kloc must be a nonnegative number", "/kloc");
  }
  if (!(s.hours_booked >= 0.0) || !std::isfinite(s.hours_booked)) {
    throw Error(ErrorCode::NegativeInput, "hours_booked must be a nonnegative number",
                "/hours_booked");
  }
  if (s.horizon_months < 1) {
    throw Error(ErrorCode::ParameterOutOfRange, "horizon_months must be >= 1",
                "/horizon_months");
  }
  if (s.certification &&
      std::find(kCertificationLabels.begin(), kCertificationLabels.end(), *s.certification) ==
          kCertificationLabels.end()) {
    throw Error(ErrorCode::SchemaMismatch, "unknown certification '" + *s.certification + "'",
                "/certification");
  }
}

std::array<double, 5> manifestation_for_horizon(const DefectModelParams& params,
                                                int horizon_months) {
  std::array<double, 5> out{};
  const double years = static_cast<double>(horizon_months) / 12.0;
  for (std::size_t u = 0; u < kLevels; ++u) {
    const double p = params.manifestation[u];
    out[u] = p == 0.0 ? 0.0 : 1.0 - std::pow(1.0 - p, years);
  }
  return out;
}

double detection_probability(const DefectModelParams& params, std::size_t verification,
                             std::size_t certification) {
  const double p =
      params.detection.at(verification) + params.certification_uplift.at(certification);
  return std::clamp(p, 0.0, 1.0);
}

RankedCpd ranked_cpd(const DefectModelParams& params, std::string_view aggregate) {
  const auto& rp = params.ranked.at(str(aggregate));
  RankedCpd cpd{rp.weights, rp.variance, {}};
  if (aggregate != node::kProjectSize) {
    bool any = false;
    std::vector<bool> inverted;
    for (const auto& d : dimensions()) {
      if (d.aggregate != aggregate) continue;
      inverted.push_back(d.inverted);
      any = any || d.inverted;
    }
    if (any) cpd.inverted = std::move(inverted);
  }
  return cpd;
}

double insertion_rate(const DefectModelParams& params, double kloc, std::size_t complexity,
                      std::size_t problem_complexity, std::size_t development_quality,
                      std::size_t size) {
  const double rate = kloc * params.complexity_multipliers[complexity] *
                      params.insertion_rates[development_quality] *
                      params.complexity_factors[problem_complexity] * params.size_factors[size];
  return std::max(rate, kMinimumInsertionRate);
}

std::size_t rank_bin(double value, const std::array<double, 4>& thresholds) {
  std::size_t bin = 0;
  while (bin < thresholds.size() && value >= thresholds[bin]) ++bin;
  return bin;
}

DefectNetwork build_defect_network(const ProjectScenario& scenario,
                                   const DefectModelParams& params) {
  validate(scenario);
  validate(params);

  const auto ranked = StateSpace::ranked5();
  const auto counts = StateSpace::counts(params.count_intervals, params.tail_factor);
  std::vector<NodeSpec> specs;

  for (const auto& d : dimensions()) {
    specs.push_back({str(d.id), ranked, {}, uniform_prior(kLevels)});
  }
  for (auto agg : {node::kVerificationQuality, node::kDevelopmentQuality,
                   node::kProblemComplexity}) {
    std::vector<std::string> parents;
    for (auto p : aggregate_parents(agg)) parents.emplace_back(p);
    specs.push_back({str(agg), ranked, std::move(parents), ranked_cpd(params, agg)});
  }
  specs.push_back({str(node::kCertification),
                   StateSpace::labeled({kCertificationLabels.begin(), kCertificationLabels.end()}),
                   {},
                   uniform_prior(kCertificationLabels.size())});
  specs.push_back({str(node::kFieldUsage),
                   StateSpace::labeled({kUsageLabels.begin(), kUsageLabels.end()}),
                   {},
                   uniform_prior(kLevels)});
  specs.push_back({str(node::kHoursRank), ranked, {}, uniform_prior(kLevels)});

  // Effective KLoC is a deterministic function of the complexity level once
  // the scenario's KLoC is fixed.
  TableCpd eff;
  for (std::size_t c = 0; c < kLevels; ++c) {
    std::vector<double> row(kLevels, 0.0);
    row[rank_bin(scenario.kloc * params.complexity_multipliers[c],
                 params.effective_kloc_thresholds)] = 1.0;
    eff.rows.push_back(std::move(row));
  }
  specs.push_back({str(node::kEffectiveKlocRank), ranked, {str(kNewFunctionalityComplexity)},
                   std::move(eff)});
  specs.push_back({str(node::kProjectSize),
                   ranked,
                   {str(node::kEffectiveKlocRank), str(node::kHoursRank)},
                   ranked_cpd(params, node::kProjectSize)});

  PoissonCpd inserted;
  for (std::size_t c = 0; c < kLevels; ++c) {
    for (std::size_t pc = 0; pc < kLevels; ++pc) {
      for (std::size_t dq = 0; dq < kLevels; ++dq) {
        for (std::size_t sz = 0; sz < kLevels; ++sz) {
          inserted.rates.push_back(insertion_rate(params, scenario.kloc, c, pc, dq, sz));
        }
      }
    }
  }
  specs.push_back({str(node::kDefectsInserted),
                   counts,
                   {str(kNewFunctionalityComplexity), str(node::kProblemComplexity),
                    str(node::kDevelopmentQuality), str(node::kProjectSize)},
                   std::move(inserted)});

  BinomialCpd found;
  for (std::size_t v = 0; v < kLevels; ++v) {
    for (std::size_t k = 0; k < kCertificationLabels.size(); ++k) {
      found.probabilities.push_back(detection_probability(params, v, k));
    }
  }
  specs.push_back({str(node::kDefectsFound),
                   counts,
                   {str(node::kDefectsInserted), str(node::kVerificationQuality),
                    str(node::kCertification)},
                   std::move(found)});
  specs.push_back({str(node::kResidualDefects),
                   counts,
                   {str(node::kDefectsInserted), str(node::kDefectsFound)},
                   SubtractCpd{}});
  const auto manifest = manifestation_for_horizon(params, scenario.horizon_months);
  specs.push_back({str(node::kFieldDefects),
                   counts,
                   {str(node::kResidualDefects), str(node::kFieldUsage)},
                   BinomialCpd{as_vector(manifest)}});

  DefectNetwork out{Network::build(std::move(specs)), {}};
  for (const auto& a : scenario.answers) {
    out.evidence.set_soft(a.dimension, as_vector(a.distribution));
  }
  out.evidence.set_soft(str(kNewFunctionalityComplexity),
                        as_vector(scenario.complexity.distribution));
  out.evidence.set_soft(str(node::kFieldUsage), as_vector(scenario.usage));
  out.evidence.set_hard(str(node::kHoursRank),
                        str(kRankLabels[rank_bin(scenario.hours_booked,
                                                 params.hours_thresholds)]));
  if (scenario.certification) {
    out.evidence.set_hard(str(node::kCertification), *scenario.certification);
  }
  return out;
}

SizeEstimate effective_size(double kloc, const Answer& complexity, double hours_booked,
                            const DefectModelParams& params) {
  if (!(kloc >= 0.0)) throw Error(ErrorCode::NegativeInput, "kloc must be >= 0", "kloc");
  if (!(hours_booked >= 0.0)) {
    throw Error(ErrorCode::NegativeInput, "hours_booked must be >= 0", "hours_booked");
  }
  check_distribution(complexity.distribution, "complexity");

  SizeEstimate out;
  std::map<double, double> mix;
  for (std::size_t c = 0; c < kLevels; ++c) {
    const double w = complexity.distribution[c];
    if (w == 0.0) continue;
    const double e = kloc * params.complexity_multipliers[c];
    mix[e] += w;
    out.mean_effective_kloc += w * e;
    out.effective_kloc_rank[rank_bin(e, params.effective_kloc_thresholds)] += w;
  }
  out.effective_kloc.assign(mix.begin(), mix.end());
  out.hours_rank[rank_bin(hours_booked, params.hours_thresholds)] = 1.0;

  const auto table = expand_ranked(ranked_cpd(params, node::kProjectSize), 2);
  for (std::size_t e = 0; e < kLevels; ++e) {
    for (std::size_t h = 0; h < kLevels; ++h) {
      const double w = out.effective_kloc_rank[e] * out.hours_rank[h];
      if (w == 0.0) continue;
      for (std::size_t s = 0; s < kLevels; ++s) out.project_size[s] += w * table.at(e * 5 + h, s);
    }
  }
  return out;
}

Prediction predict_defects(const ProjectScenario& scenario, const DefectModelParams& params) {
  return predict_defects(build_defect_network(scenario, params));
}

Prediction predict_defects(const DefectNetwork& dn) {
  const std::vector<std::string> targets = {str(node::kDefectsFound), str(node::kFieldDefects)};
  Prediction out;
  out.report = query_posteriors(dn.network, dn.evidence, targets);
  out.found = interval_expectation(out.report, node::kDefectsFound);
  out.field = interval_expectation(out.report, node::kFieldDefects);
  return out;
}

std::vector<std::string> diagnosis_targets() {
  return {str(node::kVerificationQuality), str(node::kDevelopmentQuality),
          str(node::kProblemComplexity),   str(node::kDefectsInserted),
          str(node::kResidualDefects),     str(node::kFieldDefects)};
}

PosteriorReport diagnose_from_verification(const ProjectScenario& scenario,
                                           const DefectModelParams& params,
                                           std::int64_t observed_found) {
  return diagnose_from_verification(build_defect_network(scenario, params), observed_found);
}

PosteriorReport diagnose_from_verification(DefectNetwork dn, std::int64_t observed_found) {
  const auto& states = dn.network.states(dn.network.index_of(node::kDefectsFound));
  const auto x = static_cast<double>(observed_found);
  if (observed_found < 0 || !states.contains_value(x)) {
    throw Error(ErrorCode::CountOutOfRange,
                "observed count " + std::to_string(observed_found) +
                    " is not covered by the count intervals",
                str(node::kDefectsFound));
  }
  dn.evidence.set_hard(str(node::kDefectsFound), states.label(states.index_for_value(x)));
  const auto targets = diagnosis_targets();
  return query_posteriors(dn.network, dn.evidence, targets);
}

}  // namespace heisenbn::defect
