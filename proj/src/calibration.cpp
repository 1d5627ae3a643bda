#include "heisenbn/calibration.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "heisenbn/error.hpp"
#include "heisenbn/gates.hpp"

namespace heisenbn::calibration {

namespace {

namespace node = defect::node;

constexpr std::size_t kLevels = 5;
constexpr std::size_t kCerts = 3;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Driver configurations lighter than this contribute nothing measurable.
constexpr double kDriverCutoff = 1e-16;
constexpr double kProbabilityFloor = 5e-4;

enum class Group { Insertion, Detection, Manifestation };

struct Coordinate {
  Group group;
  std::size_t level;
};

// P(X = k) for X ~ Binomial(trials, p).
double binomial_pmf(std::int64_t trials, double p, std::int64_t k) {
  if (k < 0 || k > trials) return 0.0;
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == trials ? 1.0 : 0.0;
  return boost::math::pdf(
      boost::math::binomial_distribution<double>(static_cast<double>(trials), p),
      static_cast<double>(k));
}

std::string coordinate_name(const Coordinate& c) {
  switch (c.group) {
    case Group::Insertion: return "insertion_rates/" + std::to_string(c.level);
    case Group::Detection: return "detection/" + std::to_string(c.level);
    case Group::Manifestation: return "manifestation/" + std::to_string(c.level);
  }
  return {};
}

double& slot(DefectModelParams& p, const Coordinate& c) {
  switch (c.group) {
    case Group::Insertion: return p.insertion_rates[c.level];
    case Group::Detection: return p.detection[c.level];
    case Group::Manifestation: break;
  }
  return p.manifestation[c.level];
}

double value(const DefectModelParams& p, const Coordinate& c) {
  return slot(const_cast<DefectModelParams&>(p), c);
}

struct InsertionDriver {
  std::size_t dq;
  double weight;
  double base;  // rate divided by the insertion rate of `dq`
  std::array<std::size_t, 4> config;  // complexity, problem complexity, dq, size
};

// Everything about one record that does not depend on the fitted
// parameters, plus the per-level likelihood pieces that do.
struct RecordModel {
  const ProjectRecord* record = nullptr;
  double kloc = 0.0;
  std::vector<InsertionDriver> drivers;
  std::array<std::array<double, kCerts>, kLevels> verification{};  // P(vq, cert)
  std::array<double, kLevels> usage{};
  std::vector<std::int64_t> found_trials;  // per inserted interval
  std::vector<std::int64_t> field_trials;  // per inserted interval, via residual
  std::size_t found_interval = 0;

  // Per level, per inserted interval.
  std::array<std::vector<double>, kLevels> inserted;
  std::array<std::vector<double>, kLevels> found;
  std::array<std::vector<double>, kLevels> field;
};

Factor driver_joint(const Network& net, const Evidence& ev,
                    const std::vector<std::string_view>& ids, std::vector<std::size_t>& order) {
  std::vector<std::size_t> query;
  for (auto id : ids) query.push_back(net.index_of(id));
  auto joint = joint_posterior(net, ev, query);
  // Position of each requested id within the factor's sorted variables.
  order.clear();
  for (auto q : query) {
    order.push_back(static_cast<std::size_t>(
        std::find(joint.vars().begin(), joint.vars().end(), q) - joint.vars().begin()));
  }
  return joint;
}

template <typename Fn>
void for_each_cell(const Factor& f, Fn&& fn) {
  std::vector<std::size_t> idx(f.vars().size(), 0);
  for (double v : f.values()) {
    fn(idx, v);
    for (std::size_t k = idx.size(); k-- > 0;) {
      if (++idx[k] < f.cards()[k]) break;
      idx[k] = 0;
    }
  }
}

RecordModel prepare(const ProjectRecord& record, const DefectModelParams& params) {
  RecordModel m;
  m.record = &record;
  m.kloc = record.scenario.kloc;
  const auto dn = defect::build_defect_network(record.scenario, params);
  const auto& net = dn.network;

  std::vector<std::size_t> pos;
  const auto g1 = driver_joint(net, dn.evidence,
                               {defect::kNewFunctionalityComplexity, node::kProblemComplexity,
                                node::kDevelopmentQuality, node::kProjectSize},
                               pos);
  for_each_cell(g1, [&](const std::vector<std::size_t>& idx, double w) {
    if (w < kDriverCutoff) return;
    InsertionDriver d{};
    for (std::size_t k = 0; k < 4; ++k) d.config[k] = idx[pos[k]];
    d.dq = d.config[2];
    d.weight = w;
    d.base = m.kloc * params.complexity_multipliers[d.config[0]] *
             params.complexity_factors[d.config[1]] * params.size_factors[d.config[3]];
    m.drivers.push_back(d);
  });

  const auto g2 = driver_joint(net, dn.evidence,
                               {node::kVerificationQuality, node::kCertification}, pos);
  for_each_cell(g2, [&](const std::vector<std::size_t>& idx, double w) {
    m.verification[idx[pos[0]]][idx[pos[1]]] = w;
  });
  const auto g3 = driver_joint(net, dn.evidence, {node::kFieldUsage}, pos);
  for (std::size_t u = 0; u < kLevels; ++u) m.usage[u] = g3.values()[u];

  const auto& counts = net.states(net.index_of(node::kDefectsInserted));
  const auto x = static_cast<double>(record.observed_found);
  m.found_interval = counts.index_for_value(x);
  const double found_rep = counts.representative(m.found_interval);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double rep = counts.representative(i);
    m.found_trials.push_back(thinning_trials(rep));
    const double residual = std::max(0.0, rep - found_rep);
    m.field_trials.push_back(
        thinning_trials(counts.representative(counts.index_for_value(residual))));
  }
  for (auto* block : {&m.inserted, &m.found, &m.field}) {
    for (auto& v : *block) v.assign(counts.size(), 0.0);
  }
  return m;
}

void refresh(RecordModel& m, const DefectModelParams& params, const Coordinate& c) {
  const auto& ivs = params.count_intervals;
  switch (c.group) {
    case Group::Insertion: {
      auto& out = m.inserted[c.level];
      std::fill(out.begin(), out.end(), 0.0);
      const double rate = params.insertion_rates[c.level];
      std::vector<double> row(ivs.size());
      for (const auto& d : m.drivers) {
        if (d.dq != c.level) continue;
        poisson_interval_masses(std::max(d.base * rate, defect::kMinimumInsertionRate), ivs, row);
        for (std::size_t i = 0; i < ivs.size(); ++i) out[i] += d.weight * row[i];
      }
      break;
    }
    case Group::Detection: {
      auto& out = m.found[c.level];
      std::fill(out.begin(), out.end(), 0.0);
      for (std::size_t k = 0; k < kCerts; ++k) {
        const double w = m.verification[c.level][k];
        if (w == 0.0) continue;
        const double p = defect::detection_probability(params, c.level, k);
        for (std::size_t i = 0; i < ivs.size(); ++i) {
          out[i] += w * binomial_pmf(m.found_trials[i], p, m.record->observed_found);
        }
      }
      break;
    }
    case Group::Manifestation: {
      auto& out = m.field[c.level];
      if (!m.record->observed_field) {
        std::fill(out.begin(), out.end(), m.usage[c.level]);
        break;
      }
      const auto manifest =
          defect::manifestation_for_horizon(params, m.record->scenario.horizon_months);
      for (std::size_t i = 0; i < ivs.size(); ++i) {
        out[i] = m.usage[c.level] *
                 binomial_pmf(m.field_trials[i], manifest[c.level], *m.record->observed_field);
      }
      break;
    }
  }
}

void refresh_all(RecordModel& m, const DefectModelParams& params) {
  for (std::size_t l = 0; l < kLevels; ++l) {
    refresh(m, params, {Group::Insertion, l});
    refresh(m, params, {Group::Detection, l});
    refresh(m, params, {Group::Manifestation, l});
  }
}

double log_likelihood(const RecordModel& m) {
  double total = 0.0;
  const std::size_t n = m.inserted[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0.0, f = 0.0, g = 0.0;
    for (std::size_t l = 0; l < kLevels; ++l) {
      a += m.inserted[l][i];
      f += m.found[l][i];
      g += m.field[l][i];
    }
    total += a * f * g;
  }
  return total > 0.0 ? std::log(total) : kNegInf;
}

// c * log(x), with 0 * log(0) = 0.
double xlogy(double c, double x) {
  if (c == 0.0) return 0.0;
  return x > 0.0 ? c * std::log(x) : kNegInf;
}

double log_prior(const Priors& priors, const DefectModelParams& init,
                 const DefectModelParams& params, const Coordinate& c) {
  const double x = value(params, c);
  const double x0 = value(init, c);
  const double s = priors.pseudo_count;
  if (c.group == Group::Insertion) {
    if (!(x > 0.0)) return kNegInf;
    return s * (std::log(x / x0) - x / x0 + 1.0);
  }
  const auto it = priors.beta.find(coordinate_name(c));
  double a = 1.0 + s * x0;
  double b = 1.0 + s * (1.0 - x0);
  if (it != priors.beta.end()) {
    a = it->second.alpha;
    b = it->second.beta;
  }
  return xlogy(a - 1.0, x) + xlogy(b - 1.0, 1.0 - x);
}

std::vector<Coordinate> coordinates(const FitOptions& options) {
  std::vector<Coordinate> out;
  for (std::size_t l = 0; l < kLevels; ++l) {
    if (options.fit_insertion) out.push_back({Group::Insertion, l});
  }
  for (std::size_t l = 0; l < kLevels; ++l) {
    if (options.fit_detection) out.push_back({Group::Detection, l});
  }
  // Usage None stays pinned at zero.
  for (std::size_t l = 1; l < kLevels; ++l) {
    if (options.fit_manifestation) out.push_back({Group::Manifestation, l});
  }
  return out;
}

double total_log_prior(const Priors& priors, const DefectModelParams& init,
                       const DefectModelParams& params, const FitOptions& options) {
  double total = 0.0;
  for (const auto& c : coordinates(options)) total += log_prior(priors, init, params, c);
  return total;
}

// Candidate values for one coordinate around `centre` with spacing `step`
// (log spacing for rates), always including `centre` itself.
std::vector<double> neighbourhood(const Coordinate& c, double centre, double step,
                                  const Priors& priors) {
  std::vector<double> out{centre};
  for (int k = -10; k <= 10; ++k) {
    if (k == 0) continue;
    double v = 0.0;
    if (c.group == Group::Insertion) {
      v = centre * std::exp(step * k / 10.0);
      if (v < priors.rate_min || v > priors.rate_max) continue;
    } else {
      v = centre + step * k / 10.0;
      if (v < kProbabilityFloor || v > 1.0 - kProbabilityFloor) continue;
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> coarse_grid(const Coordinate& c, double current, std::size_t points,
                                const Priors& priors, double& step) {
  std::vector<double> out{current};
  if (c.group == Group::Insertion) {
    const double lo = std::log(priors.rate_min);
    const double hi = std::log(priors.rate_max);
    step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) out.push_back(std::exp(lo + step * k));
  } else {
    const double lo = 0.01;
    const double hi = 0.99;
    step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) out.push_back(lo + step * k);
  }
  return out;
}

class Objective {
 public:
  Objective(const std::vector<ProjectRecord>& records, const Priors& priors,
            const DefectModelParams& init, const FitOptions& options)
      : priors_(priors), init_(init), options_(options) {
    for (const auto& r : records) models_.push_back(prepare(r, init));
  }

  void load(const DefectModelParams& params) {
    params_ = params;
    for (auto& m : models_) refresh_all(m, params_);
  }

  double set(const Coordinate& c, double v) {
    slot(params_, c) = v;
    for (auto& m : models_) refresh(m, params_, c);
    return evaluate();
  }

  double evaluate() const {
    return log_likelihood_sum() + total_log_prior(priors_, init_, params_, options_);
  }

  double log_likelihood_sum() const {
    double total = 0.0;
    for (const auto& m : models_) total += log_likelihood(m);
    return total;
  }

  std::vector<double> per_record() const {
    std::vector<double> out;
    for (const auto& m : models_) out.push_back(log_likelihood(m));
    return out;
  }

  const DefectModelParams& params() const { return params_; }

 private:
  const Priors& priors_;
  const DefectModelParams& init_;
  const FitOptions& options_;
  std::vector<RecordModel> models_;
  DefectModelParams params_;
};

// Picks the best of `candidates` (ties keep the earliest, which is the
// current value) and leaves the objective at that value.
double best_of(Objective& obj, const Coordinate& c, const std::vector<double>& candidates,
               double& best_value) {
  double best = kNegInf;
  best_value = candidates.front();
  for (double v : candidates) {
    const double f = obj.set(c, v);
    if (f > best) {
      best = f;
      best_value = v;
    }
  }
  return obj.set(c, best_value);
}

}  // namespace

void validate(const ProjectRecord& record) {
  defect::validate(record.scenario);
  if (record.observed_found < 0) {
    throw Error(ErrorCode::NegativeInput, "observed_found must be >= 0", "/observed_found");
  }
  if (record.observed_field && *record.observed_field < 0) {
    throw Error(ErrorCode::NegativeInput, "observed_field must be >= 0", "/observed_field");
  }
}

void validate(const Priors& priors) {
  if (!(priors.pseudo_count > 0.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "pseudo_count must be > 0", "/pseudo_count");
  }
  for (const auto& [key, b] : priors.beta) {
    if (!(b.alpha > 0.0 && b.beta > 0.0)) {
      throw Error(ErrorCode::ParameterOutOfRange, "Beta parameters must be > 0", "/beta/" + key);
    }
  }
  if (!(priors.rate_min > 0.0 && priors.rate_max > priors.rate_min)) {
    throw Error(ErrorCode::ParameterOutOfRange, "rate bounds must satisfy 0 < min < max",
                "/rate_min");
  }
}

double record_log_likelihood(const ProjectRecord& record, const DefectModelParams& params) {
  validate(record);
  auto m = prepare(record, params);
  refresh_all(m, params);
  return log_likelihood(m);
}

double penalized_log_likelihood(const std::vector<ProjectRecord>& records,
                                const Priors& priors, const DefectModelParams& init,
                                const DefectModelParams& params, const FitOptions& options) {
  double total = total_log_prior(priors, init, params, options);
  for (const auto& r : records) total += record_log_likelihood(r, params);
  return total;
}

FitReport fit_parameters(const std::vector<ProjectRecord>& records, const Priors& priors,
                         const DefectModelParams& init, const FitOptions& options) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecords, "no records to fit");
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      validate(records[i]);
    } catch (const Error& e) {
      throw e.with_path_prefix("/records/" + std::to_string(i));
    }
  }
  validate(priors);
  defect::validate(init);
  if (options.grid_points < 2) {
    throw Error(ErrorCode::ParameterOutOfRange, "grid_points must be >= 2", "grid_points");
  }

  Objective obj(records, priors, init, options);
  obj.load(init);
  FitReport report;
  report.objective_before = obj.evaluate();
  report.log_likelihood_before = obj.log_likelihood_sum();
  const auto before = obj.per_record();

  double current = report.objective_before;
  const auto coords = coordinates(options);
  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double start = current;
    for (const auto& c : coords) {
      double step = 0.0;
      double best = 0.0;
      best_of(obj, c, coarse_grid(c, value(obj.params(), c), options.grid_points, priors, step),
              best);
      for (int refinement = 0; refinement < 2; ++refinement) {
        best_of(obj, c, neighbourhood(c, best, step, priors), best);
        step /= 10.0;
      }
      current = obj.evaluate();
    }
    report.sweeps = sweep + 1;
    if (!(current - start > options.tolerance)) break;
  }

  report.params = obj.params();
  report.objective_after = obj.evaluate();
  report.log_likelihood_after = obj.log_likelihood_sum();
  report.non_improving = !(report.objective_after > report.objective_before);
  const auto after = obj.per_record();
  for (std::size_t i = 0; i < records.size(); ++i) {
    report.records.push_back({records[i].scenario.name, before[i], after[i]});
  }
  for (const auto& c : coords) {
    report.deltas.push_back({coordinate_name(c), value(init, c), value(report.params, c)});
  }
  return report;
}

std::vector<ProjectRecord> synthesize_records(const DefectModelParams& truth,
                                              std::uint64_t seed, std::size_t n,
                                              const SynthesisOptions& options,
                                              std::vector<LatentDraw>* latent) {
  defect::validate(truth);
  if (n == 0) throw Error(ErrorCode::ParameterOutOfRange, "n must be >= 1", "n");
  if (!(options.kloc_min > 0.0 && options.kloc_max >= options.kloc_min)) {
    throw Error(ErrorCode::ParameterOutOfRange, "invalid KLoC range", "kloc_min");
  }
  if (options.scenario) defect::validate(*options.scenario);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> level(0, kLevels - 1);
  std::uniform_int_distribution<std::size_t> cert(0, kCerts - 1);
  std::uniform_real_distribution<double> log_kloc(std::log(options.kloc_min),
                                                  std::log(options.kloc_max));
  std::uniform_real_distribution<double> hours_per_kloc(100.0, 400.0);

  const auto vq_table = expand_ranked(defect::ranked_cpd(truth, node::kVerificationQuality), 3);
  const auto dq_table = expand_ranked(defect::ranked_cpd(truth, node::kDevelopmentQuality), 4);
  const auto pc_table = expand_ranked(defect::ranked_cpd(truth, node::kProblemComplexity), 3);
  const auto size_table = expand_ranked(defect::ranked_cpd(truth, node::kProjectSize), 2);
  const auto counts = StateSpace::counts(truth.count_intervals, truth.tail_factor);

  auto draw = [&](std::span<const double> weights) {
    std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
    return d(rng);
  };
  auto row_of = [](std::initializer_list<std::size_t> states) {
    std::size_t r = 0;
    for (auto s : states) r = r * kLevels + s;
    return r;
  };

  std::vector<ProjectRecord> out;
  out.reserve(n);
  if (latent) latent->clear();
  for (std::size_t i = 0; i < n; ++i) {
    ProjectRecord rec;
    auto& s = rec.scenario;
    if (options.scenario) {
      s = *options.scenario;
    } else {
      for (const auto& d : defect::dimensions()) {
        if (d.id == defect::kNewFunctionalityComplexity) continue;
        s.answers.push_back(defect::Answer::point(std::string(d.id), level(rng)));
      }
      s.complexity = defect::Answer::point(std::string(defect::kNewFunctionalityComplexity),
                                           level(rng));
      s.kloc = std::exp(log_kloc(rng));
      s.hours_booked = s.kloc * hours_per_kloc(rng);
      s.usage = {};
      s.usage[level(rng)] = 1.0;
      s.certification = std::string(defect::kCertificationLabels[cert(rng)]);
    }
    if (options.usage) {
      s.usage = {};
      s.usage.at(*options.usage) = 1.0;
    }
    s.name = "synthetic-" + std::to_string(i);

    // Roots: draw each answer node from its soft answer (a point mass for
    // generated scenarios).
    std::map<std::string_view, std::size_t> root;
    for (const auto& a : s.answers) root[a.dimension] = draw(a.distribution);
    const std::size_t nfc = draw(s.complexity.distribution);
    const std::size_t usage = draw(s.usage);
    const std::size_t certification =
        s.certification ? static_cast<std::size_t>(
                              std::find(defect::kCertificationLabels.begin(),
                                        defect::kCertificationLabels.end(), *s.certification) -
                              defect::kCertificationLabels.begin())
                        : cert(rng);

    const std::size_t vq = draw(vq_table.row(row_of(
        {root["testing_quality"], root["review_quality"], root["verification_type"]})));
    const std::size_t dq = draw(dq_table.row(row_of({root["team_experience"],
                                                     root["project_management"],
                                                     root["process_maturity"],
                                                     root["tool_quality"]})));
    const std::size_t pc = draw(
        pc_table.row(row_of({nfc, root["requirements_stability"], root["domain_novelty"]})));
    const std::size_t eff =
        defect::rank_bin(s.kloc * truth.complexity_multipliers[nfc],
                         truth.effective_kloc_thresholds);
    const std::size_t hours = defect::rank_bin(s.hours_booked, truth.hours_thresholds);
    const std::size_t size = draw(size_table.row(row_of({eff, hours})));

    const double lambda = defect::insertion_rate(truth, s.kloc, nfc, pc, dq, size);
    std::vector<double> mass(truth.count_intervals.size());
    poisson_interval_masses(lambda, truth.count_intervals, mass);
    const std::size_t ins = draw(mass);

    const double p_found = defect::detection_probability(truth, vq, certification);
    std::binomial_distribution<std::int64_t> found_draw(
        thinning_trials(counts.representative(ins)), p_found);
    rec.observed_found = found_draw(rng);

    const double residual =
        std::max(0.0, counts.representative(ins) -
                          counts.representative(
                              counts.index_for_value(static_cast<double>(rec.observed_found))));
    const auto manifest = defect::manifestation_for_horizon(truth, s.horizon_months);
    std::binomial_distribution<std::int64_t> field_draw(
        thinning_trials(counts.representative(counts.index_for_value(residual))),
        manifest[usage]);
    rec.observed_field = field_draw(rng);

    if (latent) latent->push_back({vq, dq, certification, usage, ins});
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace heisenbn::calibration
