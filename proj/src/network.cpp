#include "heisenbn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <type_traits>

#include "heisenbn/error.hpp"
#include "heisenbn/gates.hpp"

namespace heisenbn {

namespace {

constexpr double kRowTolerance = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t config_count(const std::vector<std::size_t>& parents,
                         const std::vector<NodeSpec>& specs) {
  std::size_t n = 1;
  for (auto p : parents) n *= specs[p].states.size();
  return n;
}

void require(bool ok, ErrorCode code, const std::string& msg) {
  if (!ok) throw Error(code, msg);
}

Cpt expand(const NodeSpec& node, const std::vector<std::size_t>& parents,
           const std::vector<NodeSpec>& specs) {
  const std::size_t rows = config_count(parents, specs);
  const std::size_t card = node.states.size();
  return std::visit(
      Overloaded{
          [&](const TableCpd& t) {
            require(t.rows.size() == rows, ErrorCode::CpdShapeMismatch,
                    "table has " + std::to_string(t.rows.size()) + " rows, expected " +
                        std::to_string(rows));
            Cpt cpt(rows, card);
            for (std::size_t r = 0; r < rows; ++r) {
              require(t.rows[r].size() == card, ErrorCode::CpdShapeMismatch,
                      "table row " + std::to_string(r) + " has " +
                          std::to_string(t.rows[r].size()) + " entries, expected " +
                          std::to_string(card));
              std::copy(t.rows[r].begin(), t.rows[r].end(), cpt.row(r).begin());
            }
            return cpt;
          },
          [&](const NoisyOrCpd& c) {
            require(card == 2, ErrorCode::CpdShapeMismatch, "noisy-or child must be binary");
            for (auto p : parents) {
              require(specs[p].states.size() == 2, ErrorCode::CpdShapeMismatch,
                      "noisy-or parent '" + specs[p].id + "' must be binary");
            }
            require(c.inhibitors.size() == parents.size(), ErrorCode::CpdShapeMismatch,
                    "noisy-or needs one inhibitor per parent");
            return expand_noisy_or(c);
          },
          [&](const RankedCpd& c) {
            require(node.states.kind() == StateSpace::Kind::Ranked,
                    ErrorCode::CpdShapeMismatch, "ranked CPD child must be ranked5");
            for (auto p : parents) {
              require(specs[p].states.kind() == StateSpace::Kind::Ranked,
                      ErrorCode::CpdShapeMismatch,
                      "ranked parent '" + specs[p].id + "' must be ranked5");
            }
            return expand_ranked(c, parents.size());
          },
          [&](const PoissonCpd& c) {
            require(c.rates.size() == rows, ErrorCode::CpdShapeMismatch,
                    "poisson CPD has " + std::to_string(c.rates.size()) +
                        " rates, expected " + std::to_string(rows));
            return expand_poisson(c, node.states);
          },
          [&](const BinomialCpd& c) {
            require(!parents.empty() && specs[parents[0]].states.has_intervals(),
                    ErrorCode::CpdShapeMismatch,
                    "binomial CPD needs a count node as first parent");
            const std::size_t others = rows / specs[parents[0]].states.size();
            return expand_binomial_thinning(c, specs[parents[0]].states, others, node.states);
          },
          [&](const SubtractCpd&) {
            require(parents.size() == 2, ErrorCode::CpdShapeMismatch,
                    "subtract CPD needs exactly two parents");
            return expand_subtract(specs[parents[0]].states, specs[parents[1]].states,
                                   node.states);
          },
      },
      node.cpd);
}

void check_rows(Cpt& cpt) {
  for (std::size_t r = 0; r < cpt.rows; ++r) {
    auto row = cpt.row(r);
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::RowNotNormalized,
                    "row " + std::to_string(r) + " has an entry outside [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      throw Error(ErrorCode::RowNotNormalized,
                  "row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
    for (double& v : row) v /= sum;
  }
}

}  // namespace

Network Network::build(std::vector<NodeSpec> specs) {
  Network net;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!net.index_.emplace(specs[i].id, i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate node id '" + specs[i].id + "'",
                  specs[i].id);
    }
    if (specs[i].states.size() < 2) {
      throw Error(ErrorCode::InvalidStateSpace, "node needs at least two states",
                  specs[i].id);
    }
  }
  net.parents_.resize(specs.size());
  net.children_.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    for (const auto& p : specs[i].parents) {
      auto it = net.index_.find(p);
      if (it == net.index_.end()) {
        throw Error(ErrorCode::UnknownParent, "unknown parent '" + p + "'", specs[i].id);
      }
      if (std::find(net.parents_[i].begin(), net.parents_[i].end(), it->second) !=
          net.parents_[i].end()) {
        throw Error(ErrorCode::DuplicateId, "parent '" + p + "' listed twice", specs[i].id);
      }
      net.parents_[i].push_back(it->second);
      net.children_[it->second].push_back(i);
    }
  }

  // Kahn's algorithm; ties broken by declaration order.
  std::vector<std::size_t> indegree(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) indegree[i] = net.parents_[i].size();
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (indegree[i] == 0) ready.push(i);
  }
  while (!ready.empty()) {
    const auto n = ready.top();
    ready.pop();
    net.topo_.push_back(n);
    for (auto c : net.children_[n]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (net.topo_.size() != specs.size()) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
      if (indegree[i] != 0) {
        throw Error(ErrorCode::CycleDetected, "graph contains a cycle", specs[i].id);
      }
    }
  }

  net.cpts_.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    try {
      Cpt cpt = expand(specs[i], net.parents_[i], specs);
      check_rows(cpt);
      net.cpts_.push_back(std::move(cpt));
    } catch (const Error& e) {
      throw Error(e.code(), e.message(), specs[i].id);
    }
  }
  net.specs_ = std::move(specs);
  return net;
}

std::optional<std::size_t> Network::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Network::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'",
              std::string(id));
}

double Network::probability(std::size_t node, std::span<const std::size_t> parent_states,
                            std::size_t state) const {
  std::size_t row = 0;
  const auto& ps = parents_[node];
  for (std::size_t k = 0; k < ps.size(); ++k) {
    row = row * cardinality(ps[k]) + parent_states[k];
  }
  return cpts_[node].at(row, state);
}

}  // namespace heisenbn
