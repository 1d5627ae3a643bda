#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace heisenbn {

class Network;

struct HardEvidence {
  std::string state;
  friend bool operator==(const HardEvidence&, const HardEvidence&) = default;
};

/// Virtual evidence: a likelihood over the node's states multiplied into the
/// joint. Only ratios matter.
struct SoftEvidence {
  std::vector<double> likelihood;
  friend bool operator==(const SoftEvidence&, const SoftEvidence&) = default;
};

using EvidenceEntry = std::variant<HardEvidence, SoftEvidence>;

/// Observations keyed by node id; at most one entry per node.
class Evidence {
 public:
  Evidence() = default;

  Evidence& set_hard(std::string node, std::string state);
  Evidence& set_soft(std::string node, std::vector<double> likelihood);
  Evidence& set(std::string node, EvidenceEntry entry);
  bool erase(const std::string& node);

  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const EvidenceEntry* find(std::string_view node) const;
  const std::map<std::string, EvidenceEntry, std::less<>>& entries() const noexcept {
    return entries_;
  }

  /// Throws UnknownNode / InvalidEvidence naming the node.
  void validate(const Network& net) const;

  /// Likelihood vector of the entry for node `index` of `net`, or nullopt
  /// when the node is unobserved. Assumes validate() passed.
  std::optional<std::vector<double>> likelihood(const Network& net, std::size_t index) const;

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  std::map<std::string, EvidenceEntry, std::less<>> entries_;
};

/// Soft vector from (label -> weight) pairs; unlisted states get weight 0.
SoftEvidence soft_from_labels(const Network& net, std::string_view node,
                              const std::map<std::string, double>& weights);

}  // namespace heisenbn
