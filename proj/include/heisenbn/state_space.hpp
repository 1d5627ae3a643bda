#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heisenbn {

/// Inclusive range of nonnegative integer counts; `upper` absent means
/// unbounded above. Equivalent to the closed-open real range
/// [lower, upper + 1).
struct CountInterval {
  std::int64_t lower = 0;
  std::optional<std::int64_t> upper;

  bool bounded() const noexcept { return upper.has_value(); }
  std::string label() const;

  friend bool operator==(const CountInterval&, const CountInterval&) = default;
};

/// Default multiplier applied to the lower bound of a final unbounded
/// interval when a numeric representative is needed.
inline constexpr double kDefaultTailFactor = 1.5;

/// Canonical labels of the five-point ordinal scale, ascending.
inline constexpr std::string_view kRankLabels[5] = {"VeryLow", "Low", "Medium",
                                                    "High", "VeryHigh"};

class StateSpace {
 public:
  enum class Kind { Labeled, Ranked, Count };

  StateSpace() = default;

  static StateSpace labeled(std::vector<std::string> labels);
  /// Five-state ordinal scale VeryLow..VeryHigh mapped onto [0,1] in five
  /// equal bins.
  static StateSpace ranked5();
  static StateSpace counts(std::vector<CountInterval> intervals,
                           double tail_factor = kDefaultTailFactor);

  Kind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool has_intervals() const noexcept { return kind_ == Kind::Count; }
  const std::vector<CountInterval>& intervals() const noexcept { return intervals_; }
  double tail_factor() const noexcept { return tail_factor_; }

  /// Numeric value standing in for state i: interval midpoint, or
  /// tail_factor * lower for the unbounded final interval.
  double representative(std::size_t i) const;
  std::vector<double> representatives() const;

  /// Index of the interval holding the real value x (the last interval whose
  /// lower bound is <= x). Fails for x below the first lower bound.
  std::size_t index_for_value(double x) const;
  bool contains_value(double x) const noexcept;

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  Kind kind_ = Kind::Labeled;
  std::vector<std::string> labels_;
  std::vector<CountInterval> intervals_;
  double tail_factor_ = kDefaultTailFactor;
};

/// Default defect-count partition used by the defect model.
std::vector<CountInterval> default_count_intervals();

}  // namespace heisenbn
