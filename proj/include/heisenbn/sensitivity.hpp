#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heisenbn/evidence.hpp"
#include "heisenbn/inference.hpp"
#include "heisenbn/network.hpp"

namespace heisenbn {

struct SweepPoint {
  std::string state;
  /// Posterior mean of the target with the input forced to `state`; absent
  /// when that state is impossible under the base evidence.
  std::optional<double> mean;
};

struct InputSensitivity {
  std::string node;
  std::vector<SweepPoint> points;
  /// max - min over the achievable states.
  double range = 0.0;
  /// I(input; target | base evidence) in bits.
  double mutual_information = 0.0;
  bool has_impossible_states = false;
};

struct SensitivityResult {
  std::string target;
  double base_mean = 0.0;
  /// Sorted by range, largest first, ties by node id.
  std::vector<InputSensitivity> inputs;
};

/// Numeric summary of a marginal: the interval mean for count nodes, the
/// expected bin index (0..4) for ranked nodes. Throws TargetNotSummarizable
/// for labeled nodes.
double summary_mean(const Network& net, const Marginal& marginal);

SensitivityResult tornado_analysis(const Network& net, const Evidence& base,
                                   std::string_view target,
                                   const std::vector<std::string>& inputs);

/// I(X; T | ev) in bits, from the exact joint posterior of the pair.
double mutual_information(const Network& net, const Evidence& ev, std::string_view x,
                          std::string_view target);

}  // namespace heisenbn
