#include <gtest/gtest.h>

#include <cmath>

#include "heisenbn/defect_model.hpp"
#include "heisenbn/error.hpp"
#include "heisenbn/sensitivity.hpp"
#include "test_support.hpp"

namespace heisenbn::test {
namespace {

namespace node = defect::node;

double h2(double p) { return p <= 0.0 || p >= 1.0 ? 0.0 : -p * std::log2(p) - (1 - p) * std::log2(1 - p); }

TEST(MutualInformation, IndependentNodes) {
  const auto net = Network::build({binary_root("a", 0.3), binary_root("b", 0.6)});
  EXPECT_NEAR(mutual_information(net, {}, "a", "b"), 0.0, 1e-15);
}

TEST(MutualInformation, DeterministicCopyIsOneBit) {
  const auto net = Network::build(
      {binary_root("x", 0.5),
       {"t", StateSpace::labeled({"true", "false"}), {"x"}, TableCpd{{{1, 0}, {0, 1}}}}});
  EXPECT_NEAR(mutual_information(net, {}, "x", "t"), 1.0, 1e-15);
}

TEST(MutualInformation, ChainMatchesHandJoint) {
  // Joint of (A, B): 0.27, 0.03, 0.14, 0.56.
  const double pa = 0.3;
  const double pb = 0.27 + 0.14;
  double expected = 0.0;
  for (auto [v, ma, mb] : {std::tuple{0.27, pa, pb}, std::tuple{0.03, pa, 1 - pb},
                           std::tuple{0.14, 1 - pa, pb}, std::tuple{0.56, 1 - pa, 1 - pb}}) {
    expected += v * std::log2(v / (ma * mb));
  }
  const auto net = chain_ab();
  EXPECT_NEAR(mutual_information(net, {}, "A", "B"), expected, 1e-12);
  EXPECT_NEAR(mutual_information(net, {}, "B", "A"), expected, 1e-12);
  // I(A;B) = H(B) - H(B|A)
  EXPECT_NEAR(expected, h2(pb) - (0.3 * h2(0.9) + 0.7 * h2(0.2)), 1e-12);
}

TEST(MutualInformation, SymmetricOnRandomNetworks) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto net = random_network(rng, 7);
    const auto ev = random_evidence(rng, net);
    const double a = mutual_information(net, ev, "n1", "n6");
    EXPECT_NEAR(a, mutual_information(net, ev, "n6", "n1"), 1e-10);
    EXPECT_GE(a, 0.0);
  }
}

TEST(MutualInformation, RejectsSameOrUnknownNode) {
  const auto net = chain_ab();
  EXPECT_THROW(mutual_information(net, {}, "A", "A"), Error);
  try {
    mutual_information(net, {}, "A", "Z");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownNode);
  }
}

Network counted_chain() {
  // rank -> count with a shifting Poisson rate, plus an unrelated root.
  std::vector<double> rates = {1, 2, 4, 8, 16};
  return Network::build(
      {{"quality", StateSpace::ranked5(), {}, TableCpd{{{0.2, 0.2, 0.2, 0.2, 0.2}}}},
       binary_root("noise", 0.4),
       {"count", StateSpace::counts(default_count_intervals()), {"quality"}, PoissonCpd{rates}}});
}

TEST(Tornado, IndependentInputHasZeroRange) {
  const auto r = tornado_analysis(counted_chain(), {}, "count", {"noise", "quality"});
  ASSERT_EQ(r.inputs.size(), 2U);
  EXPECT_EQ(r.inputs[0].node, "quality");
  EXPECT_GT(r.inputs[0].range, 1.0);
  EXPECT_NEAR(r.inputs[1].range, 0.0, 1e-12);
  EXPECT_NEAR(r.inputs[1].mutual_information, 0.0, 1e-12);
}

TEST(Tornado, RankedTargetUsesBinIndex) {
  const auto net = Network::build(
      {{"a", StateSpace::ranked5(), {}, TableCpd{{{0.2, 0.2, 0.2, 0.2, 0.2}}}},
       {"b", StateSpace::ranked5(), {"a"}, RankedCpd{{1.0}, 1e-9, {}}}});
  const auto r = tornado_analysis(net, {}, "b", {"a"});
  EXPECT_NEAR(r.base_mean, 2.0, 1e-9);
  EXPECT_NEAR(r.inputs[0].range, 4.0, 1e-6);
}

TEST(Tornado, LabeledTargetIsRejected) {
  try {
    tornado_analysis(chain_ab(), {}, "B", {"A"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TargetNotSummarizable);
  }
}

TEST(Tornado, ImpossibleStatesAreSkippedAndFlagged) {
  auto net = Network::build(
      {{"q", StateSpace::ranked5(), {}, TableCpd{{{0.5, 0.5, 0, 0, 0}}}},
       {"count", StateSpace::counts(default_count_intervals()), {"q"},
        PoissonCpd{{1, 2, 4, 8, 16}}}});
  const auto r = tornado_analysis(net, {}, "count", {"q"});
  const auto& row = r.inputs[0];
  EXPECT_TRUE(row.has_impossible_states);
  EXPECT_TRUE(row.points[0].mean && row.points[1].mean);
  EXPECT_FALSE(row.points[2].mean);
  EXPECT_NEAR(row.range, *row.points[1].mean - *row.points[0].mean, 1e-12);
}

TEST(Tornado, ForcingObservedStateReproducesBase) {
  const auto net = counted_chain();
  Evidence ev;
  ev.set_hard("quality", "High");
  const auto r = tornado_analysis(net, ev, "count", {"quality"});
  EXPECT_EQ(*r.inputs[0].points[3].mean, r.base_mean);
}

TEST(Tornado, ScalingSoftEvidenceKeepsRanking) {
  const auto net = counted_chain();
  Evidence a;
  a.set_soft("quality", {0.1, 0.2, 0.3, 0.3, 0.1});
  Evidence b;
  b.set_soft("quality", {1, 2, 3, 3, 1});
  const auto ra = tornado_analysis(net, a, "count", {"noise", "quality"});
  const auto rb = tornado_analysis(net, b, "count", {"noise", "quality"});
  for (std::size_t i = 0; i < ra.inputs.size(); ++i) {
    EXPECT_EQ(ra.inputs[i].node, rb.inputs[i].node);
    EXPECT_NEAR(ra.inputs[i].range, rb.inputs[i].range, 1e-9);
  }
}

TEST(Tornado, DefectTemplateVerificationAndCertification) {
  const auto dn = defect::build_defect_network(defect::uniform_scenario(2, 50, 10000), {});
  const auto r = tornado_analysis(
      dn.network, dn.evidence, node::kFieldDefects,
      {std::string(node::kVerificationQuality), std::string(node::kCertification)});
  const auto& vq = r.inputs[0].node == node::kVerificationQuality ? r.inputs[0] : r.inputs[1];
  const auto& cert = r.inputs[0].node == node::kCertification ? r.inputs[0] : r.inputs[1];
  EXPECT_LE(*vq.points[4].mean, *vq.points[0].mean);
  EXPECT_LT(cert.range, vq.range);
}

}  // namespace
}  // namespace heisenbn::test
