#include "heisenbn/evidence.hpp"

#include <cmath>

#include "heisenbn/error.hpp"
#include "heisenbn/network.hpp"

namespace heisenbn {

Evidence& Evidence::set_hard(std::string node, std::string state) {
  entries_.insert_or_assign(std::move(node), HardEvidence{std::move(state)});
  return *this;
}

Evidence& Evidence::set_soft(std::string node, std::vector<double> likelihood) {
  entries_.insert_or_assign(std::move(node), SoftEvidence{std::move(likelihood)});
  return *this;
}

Evidence& Evidence::set(std::string node, EvidenceEntry entry) {
  entries_.insert_or_assign(std::move(node), std::move(entry));
  return *this;
}

bool Evidence::erase(const std::string& node) { return entries_.erase(node) > 0; }

const EvidenceEntry* Evidence::find(std::string_view node) const {
  auto it = entries_.find(node);
  return it == entries_.end() ? nullptr : &it->second;
}

void Evidence::validate(const Network& net) const {
  for (const auto& [node, entry] : entries_) {
    const auto idx = net.find(node);
    if (!idx) throw Error(ErrorCode::UnknownNode, "evidence on unknown node", node);
    const auto& states = net.states(*idx);
    if (const auto* hard = std::get_if<HardEvidence>(&entry)) {
      if (!states.index_of(hard->state)) {
        throw Error(ErrorCode::InvalidEvidence, "unknown state '" + hard->state + "'", node);
      }
      continue;
    }
    const auto& lik = std::get<SoftEvidence>(entry).likelihood;
    if (lik.size() != states.size()) {
      throw Error(ErrorCode::InvalidEvidence,
                  "soft vector has " + std::to_string(lik.size()) + " entries, node has " +
                      std::to_string(states.size()) + " states",
                  node);
    }
    bool any_positive = false;
    for (double v : lik) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidEvidence, "soft likelihoods must be finite and >= 0",
                    node);
      }
      any_positive = any_positive || v > 0.0;
    }
    if (!any_positive) {
      throw Error(ErrorCode::InvalidEvidence, "soft likelihoods are all zero", node);
    }
  }
}

std::optional<std::vector<double>> Evidence::likelihood(const Network& net,
                                                        std::size_t index) const {
  const auto* entry = find(net.id(index));
  if (!entry) return std::nullopt;
  if (const auto* soft = std::get_if<SoftEvidence>(entry)) return soft->likelihood;
  std::vector<double> out(net.cardinality(index), 0.0);
  out[*net.states(index).index_of(std::get<HardEvidence>(*entry).state)] = 1.0;
  return out;
}

SoftEvidence soft_from_labels(const Network& net, std::string_view node,
                              const std::map<std::string, double>& weights) {
  const auto idx = net.index_of(node);
  const auto& states = net.states(idx);
  SoftEvidence soft{std::vector<double>(states.size(), 0.0)};
  for (const auto& [label, w] : weights) {
    const auto s = states.index_of(label);
    if (!s) {
      throw Error(ErrorCode::InvalidEvidence, "unknown state '" + label + "'",
                  std::string(node));
    }
    soft.likelihood[*s] = w;
  }
  return soft;
}

}  // namespace heisenbn
