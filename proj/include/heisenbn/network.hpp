#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "heisenbn/cpd.hpp"
#include "heisenbn/state_space.hpp"

namespace heisenbn {

struct NodeSpec {
  std::string id;
  StateSpace states;
  std::vector<std::string> parents;
  CpdSpec cpd;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

/// Immutable validated DAG of discrete nodes. Every CPD is kept as authored
/// and also expanded to a dense table whose rows enumerate parent
/// configurations with the first parent most significant.
class Network {
 public:
  /// Validates and expands. Throws Error with the offending node id as path.
  static Network build(std::vector<NodeSpec> specs);

  std::size_t size() const noexcept { return specs_.size(); }
  const std::vector<NodeSpec>& specs() const noexcept { return specs_; }
  const NodeSpec& spec(std::size_t i) const { return specs_.at(i); }
  const std::string& id(std::size_t i) const { return specs_.at(i).id; }
  const StateSpace& states(std::size_t i) const { return specs_.at(i).states; }
  std::size_t cardinality(std::size_t i) const { return specs_.at(i).states.size(); }
  const std::vector<std::size_t>& parents(std::size_t i) const { return parents_.at(i); }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }
  const Cpt& cpt(std::size_t i) const { return cpts_.at(i); }
  const std::vector<std::size_t>& topological_order() const noexcept { return topo_; }

  std::optional<std::size_t> find(std::string_view id) const;
  /// Throws UnknownNode.
  std::size_t index_of(std::string_view id) const;

  /// Conditional probability of `state` of node i given a full parent
  /// assignment (indices into each parent's states, in parent order).
  double probability(std::size_t node, std::span<const std::size_t> parent_states,
                     std::size_t state) const;

  friend bool operator==(const Network& a, const Network& b) { return a.specs_ == b.specs_; }

 private:
  std::vector<NodeSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<Cpt> cpts_;
  std::vector<std::size_t> topo_;
};

}  // namespace heisenbn
