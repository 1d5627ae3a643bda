#include "heisenbn/inference.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "heisenbn/error.hpp"

namespace heisenbn {

namespace {

Factor cpt_factor(const Network& net, std::size_t node) {
  const auto& parents = net.parents(node);
  std::vector<std::size_t> vars(parents.begin(), parents.end());
  vars.push_back(node);
  std::sort(vars.begin(), vars.end());
  std::vector<std::size_t> cards;
  for (auto v : vars) cards.push_back(net.cardinality(v));

  // Position of each parent and of the node inside the sorted scope.
  std::vector<std::size_t> parent_pos;
  for (auto p : parents) {
    parent_pos.push_back(
        static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), p) - vars.begin()));
  }
  const auto node_pos =
      static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), node) - vars.begin());

  std::size_t total = 1;
  for (auto c : cards) total *= c;
  std::vector<double> values(total);
  std::vector<std::size_t> digit(vars.size(), 0);
  const Cpt& cpt = net.cpt(node);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t row = 0;
    for (std::size_t k = 0; k < parents.size(); ++k) {
      row = row * cards[parent_pos[k]] + digit[parent_pos[k]];
    }
    values[idx] = cpt.at(row, digit[node_pos]);
    for (std::size_t k = vars.size(); k-- > 0;) {
      if (++digit[k] < cards[k]) break;
      digit[k] = 0;
    }
  }
  return Factor(std::move(vars), std::move(cards), std::move(values));
}

// Nodes whose CPTs can affect the query: ancestors of query and evidence.
std::vector<bool> relevant_nodes(const Network& net, const Evidence& ev,
                                 std::span<const std::size_t> query) {
  std::vector<bool> keep(net.size(), false);
  std::vector<std::size_t> stack(query.begin(), query.end());
  for (const auto& [id, entry] : ev.entries()) stack.push_back(net.index_of(id));
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    if (keep[n]) continue;
    keep[n] = true;
    for (auto p : net.parents(n)) stack.push_back(p);
  }
  return keep;
}

Factor eliminate(const Network& net, const Evidence& ev, std::span<const std::size_t> query,
                 const InferenceOptions& options) {
  ev.validate(net);
  for (auto q : query) {
    if (q >= net.size()) throw Error(ErrorCode::UnknownNode, "query index out of range");
  }
  const auto keep = relevant_nodes(net, ev, query);

  std::vector<Factor> factors;
  std::vector<std::size_t> hidden;
  for (std::size_t n = 0; n < net.size(); ++n) {
    if (!keep[n]) continue;
    factors.push_back(cpt_factor(net, n));
    if (auto lik = ev.likelihood(net, n)) {
      factors.emplace_back(std::vector<std::size_t>{n},
                           std::vector<std::size_t>{net.cardinality(n)}, std::move(*lik));
    }
    if (std::find(query.begin(), query.end(), n) == query.end()) hidden.push_back(n);
  }

  std::vector<std::size_t> order;
  for (const auto& id : options.elimination_order) {
    const auto n = net.index_of(id);
    auto it = std::find(hidden.begin(), hidden.end(), n);
    if (it != hidden.end()) {
      order.push_back(n);
      hidden.erase(it);
    }
  }
  if (!hidden.empty()) {
    std::vector<std::vector<std::size_t>> scopes;
    for (const auto& f : factors) scopes.push_back(f.vars());
    for (auto n : order) {
      // Scopes after the explicit prefix are eliminated; approximate by
      // dropping the eliminated variables (fill is only a cost heuristic).
      for (auto& s : scopes) s.erase(std::remove(s.begin(), s.end(), n), s.end());
    }
    auto rest = min_fill_order(net, scopes, hidden);
    order.insert(order.end(), rest.begin(), rest.end());
  }

  for (auto var : order) {
    Factor product;
    std::vector<Factor> remaining;
    remaining.reserve(factors.size());
    for (auto& f : factors) {
      if (f.contains(var)) {
        product = product * f;
      } else {
        remaining.push_back(std::move(f));
      }
    }
    remaining.push_back(product.sum_out(var));
    factors = std::move(remaining);
  }

  Factor result;
  for (const auto& f : factors) result = result * f;
  return result;
}

}  // namespace

std::vector<std::size_t> min_fill_order(const Network& net,
                                        const std::vector<std::vector<std::size_t>>& scopes,
                                        std::vector<std::size_t> to_eliminate) {
  std::map<std::size_t, std::set<std::size_t>> adj;
  for (const auto& scope : scopes) {
    for (auto a : scope) {
      auto& na = adj[a];
      for (auto b : scope) {
        if (a != b) na.insert(b);
      }
    }
  }
  std::vector<std::size_t> order;
  while (!to_eliminate.empty()) {
    std::size_t best_pos = 0;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < to_eliminate.size(); ++k) {
      const auto v = to_eliminate[k];
      const auto& nb = adj[v];
      std::size_t fill = 0;
      for (auto a = nb.begin(); a != nb.end(); ++a) {
        for (auto b = std::next(a); b != nb.end(); ++b) {
          if (!adj[*a].count(*b)) ++fill;
        }
      }
      if (fill < best_fill ||
          (fill == best_fill && net.id(v) < net.id(to_eliminate[best_pos]))) {
        best_fill = fill;
        best_pos = k;
      }
    }
    const auto v = to_eliminate[best_pos];
    to_eliminate.erase(to_eliminate.begin() + static_cast<std::ptrdiff_t>(best_pos));
    order.push_back(v);
    const auto nb = adj[v];
    for (auto a : nb) {
      adj[a].erase(v);
      for (auto b : nb) {
        if (a != b) adj[a].insert(b);
      }
    }
    adj.erase(v);
  }
  return order;
}

Factor joint_posterior(const Network& net, const Evidence& ev,
                       std::span<const std::size_t> query, const InferenceOptions& options) {
  Factor f = eliminate(net, ev, query, options);
  const double z = f.total();
  if (!(z > 0.0)) {
    throw Error(ErrorCode::ZeroProbabilityEvidence, "evidence has zero probability");
  }
  for (double& v : f.values()) v /= z;
  return f;
}

double evidence_probability(const Network& net, const Evidence& ev,
                            const InferenceOptions& options) {
  return eliminate(net, ev, {}, options).total();
}

Marginal posterior(const Network& net, const Evidence& ev, std::string_view target,
                   const InferenceOptions& options) {
  const std::size_t idx = net.index_of(target);
  const std::size_t q[] = {idx};
  Factor f = joint_posterior(net, ev, q, options);
  Marginal m;
  m.node = std::string(target);
  m.states = net.states(idx).labels();
  m.probabilities = f.values();
  if (net.states(idx).has_intervals()) {
    m.representatives = net.states(idx).representatives();
    const auto mom = interval_expectation(m);
    m.mean = mom.mean;
    m.variance = mom.variance;
  }
  return m;
}

PosteriorReport query_posteriors(const Network& net, const Evidence& ev,
                                 std::span<const std::string> targets,
                                 const InferenceOptions& options) {
  for (const auto& t : targets) net.index_of(t);
  PosteriorReport report;
  for (const auto& t : targets) report.marginals.push_back(posterior(net, ev, t, options));
  return report;
}

const Marginal& PosteriorReport::at(std::string_view node) const {
  for (const auto& m : marginals) {
    if (m.node == node) return m;
  }
  throw Error(ErrorCode::UnknownNode, "node is not in the report", std::string(node));
}

Moments interval_expectation(const Marginal& marginal) {
  if (marginal.representatives.empty()) {
    throw Error(ErrorCode::NotAnIntervalNode, "node has no numeric intervals", marginal.node);
  }
  Moments m;
  for (std::size_t i = 0; i < marginal.probabilities.size(); ++i) {
    m.mean += marginal.probabilities[i] * marginal.representatives[i];
  }
  for (std::size_t i = 0; i < marginal.probabilities.size(); ++i) {
    const double d = marginal.representatives[i] - m.mean;
    m.variance += marginal.probabilities[i] * d * d;
  }
  return m;
}

Moments interval_expectation(const PosteriorReport& report, std::string_view node) {
  return interval_expectation(report.at(node));
}

std::vector<double> JointTable::marginal(std::size_t node) const {
  std::size_t inner = 1;
  for (std::size_t k = node + 1; k < cards.size(); ++k) inner *= cards[k];
  const std::size_t card = cards.at(node);
  std::vector<double> out(card, 0.0);
  for (std::size_t idx = 0; idx < values.size(); ++idx) {
    out[(idx / inner) % card] += values[idx];
  }
  if (!(normalizer > 0.0)) {
    throw Error(ErrorCode::ZeroProbabilityEvidence, "evidence has zero probability");
  }
  for (double& v : out) v /= normalizer;
  return out;
}

JointTable brute_force_joint(const Network& net, const Evidence& ev, std::size_t cap) {
  ev.validate(net);
  JointTable table;
  std::size_t total = 1;
  for (std::size_t n = 0; n < net.size(); ++n) {
    table.cards.push_back(net.cardinality(n));
    if (total > cap / net.cardinality(n)) {
      throw Error(ErrorCode::TooLarge, "joint table exceeds " + std::to_string(cap) +
                                           " entries");
    }
    total *= net.cardinality(n);
  }
  std::vector<std::optional<std::vector<double>>> lik(net.size());
  for (std::size_t n = 0; n < net.size(); ++n) lik[n] = ev.likelihood(net, n);

  table.values.resize(total);
  std::vector<std::size_t> assignment(net.size(), 0);
  std::vector<std::size_t> parent_states;
  for (std::size_t idx = 0; idx < total; ++idx) {
    double p = 1.0;
    for (std::size_t n = 0; n < net.size() && p != 0.0; ++n) {
      parent_states.clear();
      for (auto par : net.parents(n)) parent_states.push_back(assignment[par]);
      p *= net.probability(n, parent_states, assignment[n]);
      if (lik[n]) p *= (*lik[n])[assignment[n]];
    }
    table.values[idx] = p;
    for (std::size_t k = net.size(); k-- > 0;) {
      if (++assignment[k] < table.cards[k]) break;
      assignment[k] = 0;
    }
  }
  table.normalizer = 0.0;
  for (double v : table.values) table.normalizer += v;
  return table;
}

}  // namespace heisenbn
