#pragma once

#include <string>
#include <vector>

#include "heisenbn/evidence.hpp"
#include "heisenbn/network.hpp"

namespace heisenbn {

struct BasicEvent {
  std::string id;
  double probability = 0.0;  // P(event occurs)
  friend bool operator==(const BasicEvent&, const BasicEvent&) = default;
};

enum class GateKind { And, Or, NoisyOr };

struct Gate {
  std::string id;
  GateKind kind = GateKind::Or;
  std::vector<std::string> children;
  /// NoisyOr only: one inhibitor per child, and the leak.
  std::vector<double> inhibitors;
  double leak = 0.0;
  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Basic events feeding AND / OR / Noisy-OR gates up to a single top event.
/// Subtrees may be shared, so the structure is a DAG rather than a tree.
struct FaultTree {
  std::vector<BasicEvent> events;
  std::vector<Gate> gates;
  std::string top;
  friend bool operator==(const FaultTree&, const FaultTree&) = default;
};

std::string_view to_string(GateKind kind) noexcept;

void validate(const FaultTree& tree);

/// One binary node (states "true", "false") per event and gate; basic events
/// first, then gates, in declaration order.
Network compile_fault_tree(const FaultTree& tree);

/// P(top = true) with nothing observed.
double top_event_probability(const FaultTree& tree);

struct RankedCause {
  std::string event;
  double prior = 0.0;
  double posterior = 0.0;
};

/// Posterior P(event = true | observation of the top event) for every basic
/// event, highest first, ties by id. `observation` must only address the top
/// node.
std::vector<RankedCause> posterior_cause_ranking(const FaultTree& tree,
                                                 const Evidence& observation);

}  // namespace heisenbn
