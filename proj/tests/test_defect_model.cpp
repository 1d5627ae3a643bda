#include <gtest/gtest.h>

#include <functional>
#include <limits>

#include "heisenbn/defect_model.hpp"
#include "heisenbn/error.hpp"
#include "heisenbn/gates.hpp"

namespace heisenbn::defect {
namespace {

std::size_t mode(const Marginal& m) {
  return static_cast<std::size_t>(
      std::max_element(m.probabilities.begin(), m.probabilities.end()) -
      m.probabilities.begin());
}

Answer& answer_for(ProjectScenario& s, std::string_view dim) {
  for (auto& a : s.answers) {
    if (a.dimension == dim) return a;
  }
  throw std::logic_error("no such answer");
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

double total_variation(const Marginal& a, const Marginal& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.probabilities.size(); ++i) {
    tv += std::abs(a.probabilities[i] - b.probabilities[i]);
  }
  return tv / 2.0;
}

TEST(DefectNetwork, TemplateShape) {
  const auto dn = build_defect_network(uniform_scenario(2, 50, 10000), {});
  EXPECT_EQ(dn.network.size(), template_node_ids().size());
  for (const auto& id : template_node_ids()) EXPECT_TRUE(dn.network.find(id)) << id;
  EXPECT_EQ(dn.network.states(dn.network.index_of(node::kFieldUsage)).labels().front(), "None");
}

TEST(DefectNetwork, AllMediumAnswersGiveMediumAggregates) {
  const auto dn = build_defect_network(uniform_scenario(2, 50, 10000), {});
  for (auto agg :
       {node::kVerificationQuality, node::kDevelopmentQuality, node::kProblemComplexity}) {
    EXPECT_EQ(mode(posterior(dn.network, dn.evidence, agg)), 2U) << agg;
  }
}

TEST(DefectNetwork, MissingAnswerIsReported) {
  auto s = uniform_scenario(2, 50, 10000);
  s.answers.erase(s.answers.begin());  // testing_quality
  EXPECT_EQ(code_of([&] { build_defect_network(s, {}); }), ErrorCode::MissingDimension);
}

TEST(DefectNetwork, MalformedScenariosAreRejected) {
  auto twice = uniform_scenario(2, 50, 10000);
  twice.answers.push_back(twice.answers.front());
  EXPECT_EQ(code_of([&] { validate(twice); }), ErrorCode::SchemaMismatch);

  auto unknown = uniform_scenario(2, 50, 10000);
  unknown.answers.push_back(Answer::point("coffee_quality", 4));
  EXPECT_EQ(code_of([&] { validate(unknown); }), ErrorCode::SchemaMismatch);

  auto unnormalized = uniform_scenario(2, 50, 10000);
  unnormalized.answers[0].distribution = {0.5, 0.0, 0.0, 0.0, 0.4};
  EXPECT_EQ(code_of([&] { validate(unnormalized); }), ErrorCode::SchemaMismatch);

  auto negative = uniform_scenario(2, -1, 10000);
  EXPECT_EQ(code_of([&] { validate(negative); }), ErrorCode::NegativeInput);

  auto cert = uniform_scenario(2, 5, 100);
  cert.certification = "Maybe";
  EXPECT_EQ(code_of([&] { validate(cert); }), ErrorCode::SchemaMismatch);
}

TEST(DefectParams, Invariants) {
  DefectModelParams p;
  EXPECT_NO_THROW(validate(p));
  p.manifestation[0] = 0.01;
  EXPECT_EQ(code_of([&] { validate(p); }), ErrorCode::ParameterOutOfRange);
  p = {};
  p.insertion_rates[3] = 0.0;
  EXPECT_EQ(code_of([&] { validate(p); }), ErrorCode::ParameterOutOfRange);
  p = {};
  p.detection[1] = 1.2;
  EXPECT_EQ(code_of([&] { validate(p); }), ErrorCode::ParameterOutOfRange);
  p = {};
  p.complexity_multipliers[0] = -1;
  EXPECT_EQ(code_of([&] { validate(p); }), ErrorCode::ParameterOutOfRange);
  p = {};
  p.ranked.at(std::string(node::kDevelopmentQuality)).weights.pop_back();
  EXPECT_EQ(code_of([&] { validate(p); }), ErrorCode::CpdShapeMismatch);
}

TEST(RatingScale, EmptyCriteriaRejected) {
  RatingScale s{"testing_quality", {"a", "b", "", "d", "e"}};
  EXPECT_EQ(code_of([&] { validate(s); }), ErrorCode::SchemaMismatch);
  s.criteria[2] = "c";
  EXPECT_NO_THROW(validate(s));
}

TEST(EffectiveSize, UnitMultiplier) {
  const auto est = effective_size(100, Answer::point("nfc", 2), 10000, {});
  ASSERT_EQ(est.effective_kloc.size(), 1U);
  EXPECT_DOUBLE_EQ(est.effective_kloc[0].first, 100.0);
  EXPECT_DOUBLE_EQ(est.effective_kloc[0].second, 1.0);
}

TEST(EffectiveSize, ZeroKlocIgnoresComplexity) {
  const auto est = effective_size(0, {"nfc", {0.2, 0.2, 0.2, 0.2, 0.2}}, 0, {});
  ASSERT_EQ(est.effective_kloc.size(), 1U);
  EXPECT_EQ(est.effective_kloc[0].first, 0.0);
  EXPECT_DOUBLE_EQ(est.effective_kloc[0].second, 1.0);
  EXPECT_DOUBLE_EQ(est.effective_kloc_rank[0], 1.0);
}

TEST(EffectiveSize, MixtureOverMultipliers) {
  const auto est = effective_size(100, {"nfc", {0, 0, 0, 0.5, 0.5}}, 10000, {});
  // 100 * 1.5 and 100 * 2.5, half each.
  ASSERT_EQ(est.effective_kloc.size(), 2U);
  EXPECT_DOUBLE_EQ(est.effective_kloc[0].first, 150.0);
  EXPECT_DOUBLE_EQ(est.effective_kloc[0].second, 0.5);
  EXPECT_DOUBLE_EQ(est.effective_kloc[1].first, 250.0);
  EXPECT_DOUBLE_EQ(est.effective_kloc[1].second, 0.5);
  EXPECT_DOUBLE_EQ(est.mean_effective_kloc, 200.0);
}

TEST(EffectiveSize, NegativeInputs) {
  EXPECT_EQ(code_of([] { effective_size(-1, Answer::point("nfc", 2), 0, {}); }),
            ErrorCode::NegativeInput);
  EXPECT_EQ(code_of([] { effective_size(1, Answer::point("nfc", 2), -5, {}); }),
            ErrorCode::NegativeInput);
}

TEST(EffectiveSize, MatchesNetworkSizePosterior) {
  auto s = uniform_scenario(1, 30, 25000);
  s.complexity.distribution = {0.1, 0.2, 0.3, 0.25, 0.15};
  const auto est = effective_size(s.kloc, s.complexity, s.hours_booked, {});
  const auto dn = build_defect_network(s, {});
  // Nothing downstream of size is observed, so the network agrees exactly.
  const auto m = posterior(dn.network, dn.evidence, node::kProjectSize);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(m.probabilities[i], est.project_size[i], 1e-12);
}

TEST(Manifestation, HorizonScaling) {
  DefectModelParams p;
  const auto one_year = manifestation_for_horizon(p, 12);
  for (std::size_t u = 0; u < 5; ++u) EXPECT_NEAR(one_year[u], p.manifestation[u], 1e-15);
  const auto two_years = manifestation_for_horizon(p, 24);
  // Two independent yearly chances: 1 - 0.7^2 for High.
  EXPECT_NEAR(two_years[3], 0.51, 1e-15);
  EXPECT_EQ(manifestation_for_horizon(p, 36)[0], 0.0);
}

TEST(Predict, ZeroUsageMeansNoFieldDefects) {
  auto s = uniform_scenario(1, 80, 30000);
  s.usage = {1, 0, 0, 0, 0};
  const auto pred = predict_defects(s, {});
  EXPECT_EQ(pred.report.at(node::kFieldDefects).probabilities[0], 1.0);
  EXPECT_EQ(pred.field.mean, 0.0);
}

TEST(Predict, PerfectVerificationLeavesNothing) {
  // Detection 1 everywhere: every inserted defect is found.
  DefectModelParams p;
  p.detection = {1, 1, 1, 1, 1};
  p.certification_uplift = {0, 0, 0};
  auto s = uniform_scenario(2, 5, 1000);
  const auto dn = build_defect_network(s, p);
  const std::vector<std::string> targets = {std::string(node::kDefectsInserted),
                                            std::string(node::kDefectsFound),
                                            std::string(node::kResidualDefects),
                                            std::string(node::kFieldDefects)};
  const auto r = query_posteriors(dn.network, dn.evidence, targets);
  const auto& ins = r.at(node::kDefectsInserted).probabilities;
  const auto& found = r.at(node::kDefectsFound).probabilities;
  // With p = 1 each count lands back in the interval of its representative.
  for (std::size_t i = 0; i < ins.size(); ++i) EXPECT_NEAR(found[i], ins[i], 1e-12);
  EXPECT_NEAR(r.at(node::kResidualDefects).probabilities[0], 1.0, 1e-12);
  EXPECT_NEAR(r.at(node::kFieldDefects).probabilities[0], 1.0, 1e-12);
}

TEST(Predict, PointAnswerEqualsHardEvidence) {
  auto s = uniform_scenario(3, 40, 12000);
  answer_for(s, "testing_quality").distribution = {0, 0, 0, 0, 1};
  auto dn = build_defect_network(s, {});
  const auto soft = posterior(dn.network, dn.evidence, node::kFieldDefects);
  dn.evidence.set_hard("testing_quality", "VeryHigh");
  const auto hard = posterior(dn.network, dn.evidence, node::kFieldDefects);
  for (std::size_t i = 0; i < soft.probabilities.size(); ++i) {
    EXPECT_NEAR(soft.probabilities[i], hard.probabilities[i], 1e-14);
  }
}

TEST(Predict, BetterVerificationNeverRaisesFieldDefects) {
  for (std::size_t other : {0U, 2U, 4U}) {
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < 5; ++v) {
      auto s = uniform_scenario(other, 40, 12000);
      for (auto dim : {"testing_quality", "review_quality", "verification_type"}) {
        answer_for(s, dim) = Answer::point(dim, v);
      }
      const double mean = predict_defects(s, {}).field.mean;
      EXPECT_LE(mean, previous + 1e-12) << "other=" << other << " v=" << v;
      previous = mean;
    }
  }
}

TEST(Predict, MoreCodeNeverLowersInsertion) {
  double previous = -1.0;
  for (double kloc : {0.0, 1.0, 4.0, 10.0, 25.0, 60.0, 200.0}) {
    const auto dn = build_defect_network(uniform_scenario(2, kloc, 10000), {});
    const auto m = posterior(dn.network, dn.evidence, node::kDefectsInserted);
    const double mean = interval_expectation(m).mean;
    EXPECT_GE(mean, previous - 1e-12) << kloc;
    previous = mean;
  }
}

TEST(Predict, StableRequirementsLowerComplexity) {
  auto s = uniform_scenario(2, 8, 4000);
  answer_for(s, "requirements_stability") = Answer::point("requirements_stability", 4);
  const auto dn = build_defect_network(s, {});
  EXPECT_LE(mode(posterior(dn.network, dn.evidence, node::kProblemComplexity)), 2U);
}

TEST(Diagnose, RejectsUnrepresentableCounts) {
  EXPECT_EQ(code_of([] { diagnose_from_verification(uniform_scenario(2, 10, 1000), {}, -3); }),
            ErrorCode::CountOutOfRange);
}

TEST(Diagnose, ExtremeObservationMovesQualityMore) {
  const auto s = uniform_scenario(2, 40, 12000);
  const auto prior_dn = build_defect_network(s, {});
  const auto prior = posterior(prior_dn.network, prior_dn.evidence, node::kVerificationQuality);
  const auto found = posterior(prior_dn.network, prior_dn.evidence, node::kDefectsFound);
  const auto modal = mode(found);
  const auto& states = prior_dn.network.states(prior_dn.network.index_of(node::kDefectsFound));
  const auto typical = diagnose_from_verification(s, {}, states.intervals()[modal].lower);
  const auto extreme = diagnose_from_verification(s, {}, states.intervals().back().lower);
  EXPECT_LT(total_variation(typical.at(node::kVerificationQuality), prior),
            total_variation(extreme.at(node::kVerificationQuality), prior));
}

TEST(Diagnose, MaximalCountRaisesInsertion) {
  const auto s = uniform_scenario(2, 40, 12000);
  const auto dn = build_defect_network(s, {});
  const double prior =
      interval_expectation(posterior(dn.network, dn.evidence, node::kDefectsInserted)).mean;
  const auto post = diagnose_from_verification(s, {}, 501);
  EXPECT_GE(interval_expectation(post, node::kDefectsInserted).mean, prior);
}

}  // namespace
}  // namespace heisenbn::defect
