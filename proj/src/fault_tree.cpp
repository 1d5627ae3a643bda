#include "heisenbn/fault_tree.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "heisenbn/error.hpp"
#include "heisenbn/gates.hpp"
#include "heisenbn/inference.hpp"

namespace heisenbn {

namespace {

const StateSpace& binary_states() {
  static const StateSpace s = StateSpace::labeled({"true", "false"});
  return s;
}

// Deterministic AND/OR over k binary parents (state 0 = true).
TableCpd logic_table(GateKind kind, std::size_t k) {
  TableCpd table;
  const std::size_t rows = std::size_t{1} << k;
  for (std::size_t r = 0; r < rows; ++r) {
    // Bit set means that parent is false.
    const bool all_true = r == 0;
    const bool any_true = r != rows - 1;
    const bool out = kind == GateKind::And ? all_true : any_true;
    table.rows.push_back(out ? std::vector<double>{1.0, 0.0} : std::vector<double>{0.0, 1.0});
  }
  return table;
}

}  // namespace

std::string_view to_string(GateKind kind) noexcept {
  switch (kind) {
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::NoisyOr: return "NOISY_OR";
  }
  return "?";
}

void validate(const FaultTree& tree) {
  std::set<std::string> ids;
  for (const auto& e : tree.events) {
    if (!ids.insert(e.id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate id '" + e.id + "'", e.id);
    }
    if (!(e.probability >= 0.0 && e.probability <= 1.0)) {
      throw Error(ErrorCode::ParameterOutOfRange, "event probability outside [0,1]", e.id);
    }
  }
  for (const auto& g : tree.gates) {
    if (!ids.insert(g.id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate id '" + g.id + "'", g.id);
    }
  }
  std::map<std::string, const Gate*> gates;
  for (const auto& g : tree.gates) {
    gates[g.id] = &g;
    if (g.children.empty()) throw Error(ErrorCode::SchemaError, "gate has no children", g.id);
    for (const auto& c : g.children) {
      if (!ids.count(c)) throw Error(ErrorCode::UnknownParent, "unknown child '" + c + "'", g.id);
    }
    if (g.kind == GateKind::NoisyOr) {
      if (g.inhibitors.size() != g.children.size()) {
        throw Error(ErrorCode::CpdShapeMismatch, "noisy-or needs one inhibitor per child", g.id);
      }
    } else if (!g.inhibitors.empty() || g.leak != 0.0) {
      throw Error(ErrorCode::SchemaError, "only NOISY_OR gates take inhibitors or a leak", g.id);
    }
  }
  if (!ids.count(tree.top)) {
    throw Error(ErrorCode::UnknownNode, "top event '" + tree.top + "' is not defined", tree.top);
  }
  // Everything must hang off the top event.
  std::set<std::string> reached;
  std::vector<std::string> stack{tree.top};
  while (!stack.empty()) {
    auto id = stack.back();
    stack.pop_back();
    if (!reached.insert(id).second) continue;
    if (auto it = gates.find(id); it != gates.end()) {
      for (const auto& c : it->second->children) stack.push_back(c);
    }
  }
  for (const auto& id : ids) {
    if (!reached.count(id)) {
      throw Error(ErrorCode::SchemaError, "'" + id + "' is not reachable from the top event", id);
    }
  }
}

Network compile_fault_tree(const FaultTree& tree) {
  validate(tree);
  std::vector<NodeSpec> specs;
  for (const auto& e : tree.events) {
    specs.push_back({e.id, binary_states(), {}, TableCpd{{{e.probability, 1.0 - e.probability}}}});
  }
  for (const auto& g : tree.gates) {
    CpdSpec cpd = g.kind == GateKind::NoisyOr
                      ? CpdSpec{NoisyOrCpd{g.inhibitors, g.leak}}
                      : CpdSpec{logic_table(g.kind, g.children.size())};
    specs.push_back({g.id, binary_states(), g.children, std::move(cpd)});
  }
  return Network::build(std::move(specs));
}

double top_event_probability(const FaultTree& tree) {
  const auto net = compile_fault_tree(tree);
  return posterior(net, {}, tree.top).probabilities[0];
}

std::vector<RankedCause> posterior_cause_ranking(const FaultTree& tree,
                                                 const Evidence& observation) {
  if (observation.empty()) {
    throw Error(ErrorCode::EvidenceNotOnTop, "no observation of the top event", tree.top);
  }
  for (const auto& [node, entry] : observation.entries()) {
    if (node != tree.top) {
      throw Error(ErrorCode::EvidenceNotOnTop, "evidence must target the top event", node);
    }
  }
  const auto net = compile_fault_tree(tree);
  std::vector<RankedCause> out;
  for (const auto& e : tree.events) {
    out.push_back({e.id, e.probability, posterior(net, observation, e.id).probabilities[0]});
  }
  std::sort(out.begin(), out.end(), [](const RankedCause& a, const RankedCause& b) {
    if (a.posterior != b.posterior) return a.posterior > b.posterior;
    return a.event < b.event;
  });
  return out;
}

}  // namespace heisenbn
