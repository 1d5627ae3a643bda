#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heisenbn/evidence.hpp"
#include "heisenbn/factor.hpp"
#include "heisenbn/network.hpp"

namespace heisenbn {

struct InferenceOptions {
  /// Explicit elimination order by node id. Nodes not listed are eliminated
  /// afterwards in min-fill order. Empty means pure min-fill.
  std::vector<std::string> elimination_order;
};

struct Marginal {
  std::string node;
  std::vector<std::string> states;
  std::vector<double> probabilities;
  /// Interval representatives for count nodes; empty otherwise.
  std::vector<double> representatives;
  std::optional<double> mean;
  std::optional<double> variance;
};

struct PosteriorReport {
  std::vector<Marginal> marginals;

  /// Throws UnknownNode when `node` was not a target.
  const Marginal& at(std::string_view node) const;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact normalized joint posterior over `query` (node indices) given the
/// evidence, by variable elimination. The result's variables are sorted by
/// node index. Throws ZeroProbabilityEvidence when the evidence is
/// impossible.
Factor joint_posterior(const Network& net, const Evidence& ev,
                       std::span<const std::size_t> query,
                       const InferenceOptions& options = {});

/// Probability of the evidence; with soft entries, the likelihood-weighted
/// normalizer.
double evidence_probability(const Network& net, const Evidence& ev,
                            const InferenceOptions& options = {});

PosteriorReport query_posteriors(const Network& net, const Evidence& ev,
                                 std::span<const std::string> targets,
                                 const InferenceOptions& options = {});

/// Single-target convenience.
Marginal posterior(const Network& net, const Evidence& ev, std::string_view target,
                   const InferenceOptions& options = {});

/// Mean and variance of a count-node marginal over its interval
/// representatives. Throws NotAnIntervalNode.
Moments interval_expectation(const Marginal& marginal);
Moments interval_expectation(const PosteriorReport& report, std::string_view node);

/// Min-fill elimination order for the given variables over the scopes;
/// ties go to the smaller node id.
std::vector<std::size_t> min_fill_order(const Network& net,
                                        const std::vector<std::vector<std::size_t>>& scopes,
                                        std::vector<std::size_t> to_eliminate);

/// Full joint over all nodes (node index order, last node fastest) with the
/// evidence folded in, unnormalized.
struct JointTable {
  std::vector<std::size_t> cards;
  std::vector<double> values;
  double normalizer = 0.0;

  std::vector<double> marginal(std::size_t node) const;
};

inline constexpr std::size_t kDefaultJointCap = std::size_t{1} << 20;

/// Test oracle. Throws TooLarge when the joint exceeds `cap` entries.
JointTable brute_force_joint(const Network& net, const Evidence& ev,
                             std::size_t cap = kDefaultJointCap);

}  // namespace heisenbn
