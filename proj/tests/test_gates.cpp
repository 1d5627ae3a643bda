#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "heisenbn/error.hpp"
#include "heisenbn/gates.hpp"
#include "heisenbn/network.hpp"

namespace heisenbn::test {
namespace {

// Independent oracles: direct pmf sums and a midpoint Riemann sum.
double poisson_pmf(double rate, std::int64_t k) {
  return std::exp(static_cast<double>(k) * std::log(rate) - rate -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

double binomial_pmf(std::int64_t n, double p, std::int64_t k) {
  const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(log_c + k * std::log(p) + (n - k) * std::log1p(-p));
}

std::array<double, 5> riemann_bins(double mean, double variance, std::size_t slices) {
  std::array<double, 5> bins{};
  const double h = 1.0 / static_cast<double>(slices);
  for (std::size_t i = 0; i < slices; ++i) {
    const double x = (static_cast<double>(i) + 0.5) * h;
    const double d = x - mean;
    const double density = std::exp(-0.5 * d * d / variance);
    bins[std::min<std::size_t>(4, static_cast<std::size_t>(x * 5.0))] += density * h;
  }
  const double total = std::accumulate(bins.begin(), bins.end(), 0.0);
  for (auto& b : bins) b /= total;
  return bins;
}

TEST(NoisyOr, ProductFormula) {
  const auto cpt = expand_noisy_or({{0.2, 0.3}, 0.0});
  // Row 0 = both parents true.
  EXPECT_NEAR(cpt.at(0, 0), 0.94, 1e-15);
  EXPECT_DOUBLE_EQ(cpt.at(3, 0), 0.0);

  const auto leak = expand_noisy_or({{0.5}, 0.1});
  EXPECT_NEAR(leak.at(0, 1), 0.45, 1e-15);
}

TEST(NoisyOr, ParameterRange) {
  EXPECT_THROW(expand_noisy_or({{1.2}, 0.0}), Error);
  EXPECT_THROW(expand_noisy_or({{0.5}, -0.1}), Error);
}

TEST(NoisyOr, ZeroInhibitorsIsDeterministicOr) {
  const auto cpt = expand_noisy_or({{0.0, 0.0, 0.0}, 0.0});
  for (std::size_t r = 0; r < 8; ++r) {
    const bool any_true = r != 7;  // row 7 = all parents false
    EXPECT_DOUBLE_EQ(cpt.at(r, 0), any_true ? 1.0 : 0.0);
  }
}

TEST(NoisyOr, AddingTrueParentNeverLowersChild) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    NoisyOrCpd cpd{{u(rng), u(rng), u(rng), u(rng)}, u(rng) * 0.2};
    const auto cpt = expand_noisy_or(cpd);
    for (std::size_t r = 0; r < 16; ++r) {
      for (std::size_t bit = 0; bit < 4; ++bit) {
        if (r & (1U << bit)) {  // parent false here; flip to true
          EXPECT_GE(cpt.at(r & ~(1U << bit), 0), cpt.at(r, 0) - 1e-15);
        }
      }
    }
  }
}

TEST(Ranked, DegenerateVariance) {
  const auto cpt = expand_ranked({{1.0}, 1e-9, {}}, 1);
  EXPECT_NEAR(cpt.at(2, 2), 1.0, 1e-12);
}

TEST(Ranked, SymmetricAroundMiddle) {
  const auto cpt = expand_ranked({{1.0, 1.0}, 0.05, {}}, 2);
  const auto row = cpt.row(0 * 5 + 4);  // VeryLow, VeryHigh
  EXPECT_NEAR(row[0], row[4], 1e-9);
  EXPECT_NEAR(row[1], row[3], 1e-9);
  EXPECT_EQ(std::max_element(row.begin(), row.end()) - row.begin(), 2);
}

TEST(Ranked, MatchesRiemannOracle) {
  const auto cpt = expand_ranked({{1.0}, 0.05, {}}, 1);
  const auto oracle = riemann_bins(0.7, 0.05, 1'000'000);
  for (std::size_t s = 0; s < 5; ++s) EXPECT_NEAR(cpt.at(3, s), oracle[s], 1e-8);
}

TEST(Ranked, InvertedParentMirrors) {
  const auto plain = expand_ranked({{1.0}, 0.02, {}}, 1);
  const auto inv = expand_ranked({{1.0}, 0.02, {true}}, 1);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t s = 0; s < 5; ++s) {
      EXPECT_NEAR(inv.at(r, s), plain.at(4 - r, s), 1e-12);
    }
  }
}

TEST(Ranked, RaisingParentDominates) {
  const auto cpt = expand_ranked({{1.0, 2.0, 0.5}, 0.03, {}}, 3);
  for (std::size_t r = 0; r < 125; ++r) {
    std::size_t d[3] = {r / 25, (r / 5) % 5, r % 5};
    for (std::size_t k = 0; k < 3; ++k) {
      if (d[k] == 4) continue;
      std::size_t up[3] = {d[0], d[1], d[2]};
      ++up[k];
      const std::size_t r2 = up[0] * 25 + up[1] * 5 + up[2];
      double cdf_lo = 0.0;
      double cdf_hi = 0.0;
      for (std::size_t s = 0; s < 4; ++s) {
        cdf_lo += cpt.at(r, s);
        cdf_hi += cpt.at(r2, s);
        EXPECT_LE(cdf_hi, cdf_lo + 1e-12);
      }
    }
  }
}

TEST(Ranked, ParameterRange) {
  EXPECT_THROW(expand_ranked({{0.0, 0.0}, 0.1, {}}, 2), Error);
  EXPECT_THROW(expand_ranked({{1.0}, 0.0, {}}, 1), Error);
  EXPECT_THROW(expand_ranked({{-1.0, 2.0}, 0.1, {}}, 2), Error);
}

TEST(Poisson, VanishingRate) {
  const auto child = StateSpace::counts({{0, 0}, {1, std::nullopt}});
  const auto cpt = expand_poisson({{1e-9}}, child);
  EXPECT_NEAR(cpt.at(0, 0), 1.0, 1e-8);
}

TEST(Poisson, UnitRate) {
  const auto child = StateSpace::counts({{0, 0}, {1, 1}, {2, std::nullopt}});
  const auto cpt = expand_poisson({{1.0}}, child);
  EXPECT_NEAR(cpt.at(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(cpt.at(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(cpt.at(0, 2), 1.0 - 2.0 * std::exp(-1.0), 1e-15);
}

TEST(Poisson, MatchesPmfSumsOnDefaultIntervals) {
  const auto child = StateSpace::counts(default_count_intervals());
  for (double rate : {0.3, 5.0, 37.0, 180.0, 640.0}) {
    const auto cpt = expand_poisson({{rate}}, child);
    double row_sum = 0.0;
    for (std::size_t s = 0; s + 1 < child.size(); ++s) {
      const auto& iv = child.intervals()[s];
      double oracle = 0.0;
      for (auto k = iv.lower; k <= *iv.upper; ++k) oracle += poisson_pmf(rate, k);
      EXPECT_NEAR(cpt.at(0, s), oracle, 1e-12) << "rate " << rate << " interval " << s;
      row_sum += cpt.at(0, s);
    }
    row_sum += cpt.at(0, child.size() - 1);
    EXPECT_NEAR(row_sum, 1.0, 1e-12);
  }
}

TEST(Poisson, RejectsBadInput) {
  const auto child = StateSpace::counts({{0, 0}, {1, std::nullopt}});
  EXPECT_THROW(expand_poisson({{0.0}}, child), Error);
  EXPECT_THROW(expand_poisson({{1.0}}, StateSpace::counts({{0, 0}, {1, 5}})), Error);
}

TEST(BinomialThinning, HalfOfTen) {
  const auto parent = StateSpace::counts({{10, 10}, {11, std::nullopt}});
  std::vector<CountInterval> point;
  for (std::int64_t k = 0; k <= 20; ++k) point.push_back({k, k});
  point.push_back({21, std::nullopt});
  const auto child = StateSpace::counts(point);
  const auto cpt = expand_binomial_thinning({{0.5}}, parent, 1, child);
  EXPECT_NEAR(cpt.at(0, 5), 0.24609375, 1e-15);
}

TEST(BinomialThinning, ZeroAndPerfectDetection) {
  const auto parent = StateSpace::counts({{0, 0}, {1, 9}, {10, 10}});
  const auto child = StateSpace::counts({{0, 0}, {1, 4}, {5, 9}, {10, 10}});
  const auto cpt = expand_binomial_thinning({{0.0, 1.0}}, parent, 2, child);
  // Row layout: parent interval major, then p configuration.
  EXPECT_DOUBLE_EQ(cpt.at(2 * 2 + 0, 0), 1.0);  // n=10, p=0
  EXPECT_DOUBLE_EQ(cpt.at(2 * 2 + 1, 3), 1.0);  // n=10, p=1
  EXPECT_DOUBLE_EQ(cpt.at(1 * 2 + 1, 2), 1.0);  // [1,9] represented by 5
}

TEST(BinomialThinning, MeanOnPointIntervals) {
  std::vector<CountInterval> point;
  for (std::int64_t k = 0; k <= 40; ++k) point.push_back({k, k});
  const auto space = StateSpace::counts(point);
  for (double p : {0.1, 0.35, 0.8}) {
    const auto cpt = expand_binomial_thinning({{p}}, space, 1, space);
    for (std::size_t n = 0; n < space.size(); ++n) {
      double mean = 0.0;
      for (std::size_t k = 0; k < space.size(); ++k) mean += cpt.at(n, k) * static_cast<double>(k);
      EXPECT_NEAR(mean, static_cast<double>(n) * p, 1e-10);
    }
  }
}

TEST(BinomialThinning, MatchesPmfSums) {
  const auto space = StateSpace::counts(default_count_intervals());
  const auto cpt = expand_binomial_thinning({{0.37}}, space, 1, space);
  for (std::size_t n_idx = 0; n_idx < space.size(); ++n_idx) {
    const auto n = thinning_trials(space.representative(n_idx));
    for (std::size_t s = 0; s < space.size(); ++s) {
      const auto& iv = space.intervals()[s];
      double oracle = 0.0;
      for (auto k = iv.lower; k <= std::min(iv.upper.value_or(n), n); ++k) {
        oracle += binomial_pmf(n, 0.37, k);
      }
      EXPECT_NEAR(cpt.at(n_idx, s), oracle, 1e-12);
    }
  }
}

TEST(BinomialThinning, IncompatibleChild) {
  const auto parent = StateSpace::counts({{0, 0}, {1, 50}});
  const auto child = StateSpace::counts({{0, 0}, {1, 10}});
  EXPECT_THROW(expand_binomial_thinning({{0.5}}, parent, 1, child), Error);
}

TEST(Subtract, PointMassOnDifference) {
  std::vector<CountInterval> point;
  for (std::int64_t k = 0; k <= 10; ++k) point.push_back({k, k});
  const auto space = StateSpace::counts(point);
  const auto cpt = expand_subtract(space, space, space);
  EXPECT_DOUBLE_EQ(cpt.at(10 * 11 + 4, 6), 1.0);
  EXPECT_DOUBLE_EQ(cpt.at(3 * 11 + 5, 0), 1.0);
  EXPECT_DOUBLE_EQ(cpt.at(0, 0), 1.0);
}

TEST(Subtract, IncompatibleChild) {
  const auto wide = StateSpace::counts({{0, 0}, {1, 100}});
  const auto narrow = StateSpace::counts({{10, 20}, {21, 30}});
  EXPECT_THROW(expand_subtract(wide, wide, narrow), Error);
}

TEST(GateExpansion, EveryRowNormalized) {
  const auto space = StateSpace::counts(default_count_intervals());
  std::vector<Cpt> cpts;
  cpts.push_back(expand_noisy_or({{0.1, 0.7, 0.3}, 0.05}));
  cpts.push_back(expand_ranked({{1.0, 3.0}, 0.01, {false, true}}, 2));
  cpts.push_back(expand_poisson({{0.5, 12.0, 300.0, 2400.0}}, space));
  cpts.push_back(expand_binomial_thinning({{0.2, 0.95}}, space, 2, space));
  cpts.push_back(expand_subtract(space, space, space));
  for (const auto& cpt : cpts) {
    for (std::size_t r = 0; r < cpt.rows; ++r) {
      const auto row = cpt.row(r);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
    }
  }
}

}  // namespace
}  // namespace heisenbn::test
