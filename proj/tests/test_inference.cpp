#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "heisenbn/error.hpp"
#include "heisenbn/inference.hpp"
#include "test_support.hpp"

namespace heisenbn::test {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::Io;
}

TEST(NetworkBuild, SingleBinaryNode) {
  auto net = Network::build({binary_root("X", 0.3)});
  EXPECT_EQ(net.size(), 1U);
  EXPECT_DOUBLE_EQ(net.cpt(0).at(0, 0), 0.3);
}

TEST(NetworkBuild, CycleRejected) {
  const auto binary = StateSpace::labeled({"true", "false"});
  const TableCpd table{{{0.5, 0.5}, {0.5, 0.5}}};
  EXPECT_EQ(code_of([&] {
              Network::build({{"A", binary, {"B"}, table}, {"B", binary, {"A"}, table}});
            }),
            ErrorCode::CycleDetected);
}

TEST(NetworkBuild, UnnormalizedRowNamesNodeAndRow) {
  try {
    Network::build({{"X", StateSpace::labeled({"a", "b"}), {}, TableCpd{{{0.5, 0.6}}}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RowNotNormalized);
    EXPECT_EQ(e.path(), "X");
    EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos);
  }
}

TEST(NetworkBuild, SmallDriftIsRenormalized) {
  auto net = Network::build(
      {{"X", StateSpace::labeled({"a", "b"}), {}, TableCpd{{{0.3 + 5e-10, 0.7}}}}});
  EXPECT_NEAR(net.cpt(0).at(0, 0) + net.cpt(0).at(0, 1), 1.0, 1e-15);
}

TEST(NetworkBuild, UnknownParentAndShapeMismatch) {
  const auto binary = StateSpace::labeled({"true", "false"});
  EXPECT_EQ(code_of([&] {
              Network::build({{"A", binary, {"Z"}, TableCpd{{{0.5, 0.5}, {0.5, 0.5}}}}});
            }),
            ErrorCode::UnknownParent);
  EXPECT_EQ(code_of([&] {
              Network::build({binary_root("A", 0.5),
                              {"B", binary, {"A"}, TableCpd{{{0.5, 0.5}}}}});
            }),
            ErrorCode::CpdShapeMismatch);
  EXPECT_EQ(code_of([&] { Network::build({binary_root("A", 0.5), binary_root("A", 0.2)}); }),
            ErrorCode::DuplicateId);
}

TEST(QueryPosteriors, ChainForward) {
  const auto net = chain_ab();
  const auto m = posterior(net, {}, "B");
  // 0.3*0.9 + 0.7*0.2
  EXPECT_NEAR(m.probabilities[0], 0.41, 1e-15);
}

TEST(QueryPosteriors, ChainBackward) {
  const auto net = chain_ab();
  Evidence ev;
  ev.set_hard("B", "true");
  EXPECT_NEAR(posterior(net, ev, "A").probabilities[0], 0.27 / 0.41, 1e-14);
  EXPECT_NEAR(evidence_probability(net, ev), 0.41, 1e-15);
}

TEST(QueryPosteriors, ConditioningOnTargetGivesPointMass) {
  std::mt19937_64 rng(7);
  const auto net = random_network(rng, 6);
  Evidence ev;
  ev.set_hard("n3", "s1");
  const auto m = posterior(net, ev, "n3");
  EXPECT_DOUBLE_EQ(m.probabilities[1], 1.0);
}

TEST(QueryPosteriors, ImpossibleEvidence) {
  auto net = Network::build(
      {binary_root("A", 1.0),
       {"B", StateSpace::labeled({"true", "false"}), {"A"}, TableCpd{{{1.0, 0.0}, {0.5, 0.5}}}}});
  Evidence ev;
  ev.set_hard("B", "false");
  EXPECT_EQ(code_of([&] { posterior(net, ev, "A"); }), ErrorCode::ZeroProbabilityEvidence);
  EXPECT_EQ(code_of([&] { posterior(net, {}, "nope"); }), ErrorCode::UnknownNode);
}

TEST(QueryPosteriors, InvalidEvidenceRejected) {
  const auto net = chain_ab();
  Evidence ev;
  ev.set_soft("A", {0.0, 0.0});
  EXPECT_EQ(code_of([&] { posterior(net, ev, "B"); }), ErrorCode::InvalidEvidence);
  Evidence bad_state;
  bad_state.set_hard("A", "maybe");
  EXPECT_EQ(code_of([&] { posterior(net, bad_state, "B"); }), ErrorCode::InvalidEvidence);
  Evidence bad_len;
  bad_len.set_soft("A", {1.0});
  EXPECT_EQ(code_of([&] { posterior(net, bad_len, "B"); }), ErrorCode::InvalidEvidence);
}

TEST(BruteForce, SingleNodeAndChain) {
  auto single = Network::build({binary_root("X", 0.3)});
  const auto j = brute_force_joint(single, {});
  EXPECT_DOUBLE_EQ(j.values[0], 0.3);
  EXPECT_DOUBLE_EQ(j.values[1], 0.7);
  EXPECT_DOUBLE_EQ(j.normalizer, 1.0);

  Evidence ev;
  ev.set_hard("B", "true");
  EXPECT_NEAR(brute_force_joint(chain_ab(), ev).normalizer, 0.41, 1e-15);
}

TEST(BruteForce, IndependentNodesFactorize) {
  auto net = Network::build({binary_root("X", 0.3), binary_root("Y", 0.6)});
  const auto j = brute_force_joint(net, {});
  EXPECT_DOUBLE_EQ(j.values[0], 0.3 * 0.6);
  EXPECT_DOUBLE_EQ(j.values[1], 0.3 * 0.4);
  EXPECT_DOUBLE_EQ(j.values[2], 0.7 * 0.6);
  EXPECT_DOUBLE_EQ(j.values[3], 0.7 * 0.4);
}

TEST(BruteForce, TooLarge) {
  std::mt19937_64 rng(1);
  const auto net = random_network(rng, 12, 4);
  EXPECT_EQ(code_of([&] { brute_force_joint(net, {}, 16); }), ErrorCode::TooLarge);
}

// Property: variable elimination equals enumeration on random networks.
TEST(InferenceProperty, MatchesBruteForce) {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<std::size_t> nn(1, 9);
    const auto net = random_network(rng, nn(rng));
    const auto ev = random_evidence(rng, net);
    const auto joint = brute_force_joint(net, ev);
    for (std::size_t n = 0; n < net.size(); ++n) {
      const auto ve = posterior(net, ev, net.id(n)).probabilities;
      const auto bf = joint.marginal(n);
      for (std::size_t s = 0; s < ve.size(); ++s) {
        ASSERT_NEAR(ve[s], bf[s], 1e-10) << "trial " << trial << " node " << n;
      }
    }
  }
}

TEST(InferenceProperty, VacuousSoftEvidenceChangesNothing) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_network(rng, 8);
    const auto base = random_evidence(rng, net);
    for (std::size_t n = 0; n < net.size(); ++n) {
      if (base.find(net.id(n))) continue;
      Evidence ev = base;
      ev.set_soft(net.id(n), std::vector<double>(net.cardinality(n), 1.0));
      for (std::size_t t = 0; t < net.size(); ++t) {
        const auto a = posterior(net, base, net.id(t)).probabilities;
        const auto b = posterior(net, ev, net.id(t)).probabilities;
        for (std::size_t s = 0; s < a.size(); ++s) ASSERT_NEAR(a[s], b[s], 1e-12);
      }
      break;
    }
  }
}

TEST(InferenceProperty, PointSoftEqualsHardAndScalingInvariance) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_network(rng, 7);
    const std::size_t n = trial % net.size();
    const std::size_t state = static_cast<std::size_t>(trial) % net.cardinality(n);
    Evidence hard;
    hard.set_hard(net.id(n), net.states(n).label(state));
    std::vector<double> point(net.cardinality(n), 0.0);
    point[state] = 1.0;
    Evidence soft;
    soft.set_soft(net.id(n), point);

    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::vector<double> lik(net.cardinality(n));
    for (auto& v : lik) v = u(rng);
    Evidence a;
    a.set_soft(net.id(n), lik);
    for (auto& v : lik) v *= 37.5;
    Evidence b;
    b.set_soft(net.id(n), lik);

    for (std::size_t t = 0; t < net.size(); ++t) {
      const auto ph = posterior(net, hard, net.id(t)).probabilities;
      const auto ps = posterior(net, soft, net.id(t)).probabilities;
      const auto pa = posterior(net, a, net.id(t)).probabilities;
      const auto pb = posterior(net, b, net.id(t)).probabilities;
      for (std::size_t s = 0; s < ph.size(); ++s) {
        ASSERT_NEAR(ph[s], ps[s], 1e-12);
        ASSERT_NEAR(pa[s], pb[s], 1e-12);
      }
    }
  }
}

TEST(InferenceProperty, EliminationOrderInvariance) {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    const auto net = random_network(rng, 10);
    const auto ev = random_evidence(rng, net);
    InferenceOptions forward;
    InferenceOptions reverse;
    for (std::size_t n = 0; n < net.size(); ++n) {
      forward.elimination_order.push_back(net.id(n));
      reverse.elimination_order.push_back(net.id(net.size() - 1 - n));
    }
    for (std::size_t t = 0; t < net.size(); ++t) {
      const auto a = posterior(net, ev, net.id(t)).probabilities;
      const auto b = posterior(net, ev, net.id(t), forward).probabilities;
      const auto c = posterior(net, ev, net.id(t), reverse).probabilities;
      for (std::size_t s = 0; s < a.size(); ++s) {
        ASSERT_NEAR(a[s], b[s], 1e-10);
        ASSERT_NEAR(a[s], c[s], 1e-10);
      }
    }
  }
}

TEST(IntervalExpectation, DegenerateAndTwoPoint) {
  Marginal point{"x", {}, {1.0, 0.0}, {5.0, 10.0}, {}, {}};
  auto m = interval_expectation(point);
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_DOUBLE_EQ(m.variance, 0.0);

  Marginal two{"x", {}, {0.5, 0.5}, {0.0, 10.0}, {}, {}};
  m = interval_expectation(two);
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_DOUBLE_EQ(m.variance, 25.0);
}

TEST(IntervalExpectation, MidpointRepresentatives) {
  const auto space = StateSpace::counts({{0, 0}, {1, 2}, {3, 5}});
  EXPECT_EQ(space.representatives(), (std::vector<double>{0.0, 1.5, 4.0}));
  Marginal u{"x", space.labels(), {1.0 / 3, 1.0 / 3, 1.0 / 3}, space.representatives(), {}, {}};
  EXPECT_NEAR(interval_expectation(u).mean, (0.0 + 1.5 + 4.0) / 3.0, 1e-15);
}

TEST(IntervalExpectation, UnboundedTailUsesFactor) {
  const auto space = StateSpace::counts({{0, 9}, {10, std::nullopt}});
  EXPECT_DOUBLE_EQ(space.representative(1), 15.0);
  const auto wide = StateSpace::counts({{0, 9}, {10, std::nullopt}}, 2.0);
  EXPECT_DOUBLE_EQ(wide.representative(1), 20.0);
}

TEST(IntervalExpectation, RejectsLabeledNode) {
  PosteriorReport report{{Marginal{"x", {"a", "b"}, {0.5, 0.5}, {}, {}, {}}}};
  EXPECT_EQ(code_of([&] { interval_expectation(report, "x"); }), ErrorCode::NotAnIntervalNode);
}

TEST(StateSpaceValidation, IntervalsMustBeContiguous) {
  EXPECT_EQ(code_of([] { StateSpace::counts({{0, 0}, {2, 3}}); }),
            ErrorCode::InvalidStateSpace);
  EXPECT_EQ(code_of([] { StateSpace::counts({{0, std::nullopt}, {1, 2}}); }),
            ErrorCode::InvalidStateSpace);
  EXPECT_EQ(code_of([] { StateSpace::labeled({"a", "a"}); }), ErrorCode::InvalidStateSpace);
  const auto ok = StateSpace::counts(default_count_intervals());
  EXPECT_EQ(ok.index_for_value(6.0), 4U);
  EXPECT_EQ(ok.index_for_value(2.5), 2U);
  EXPECT_EQ(ok.index_for_value(1e6), 10U);
}

}  // namespace
}  // namespace heisenbn::test
