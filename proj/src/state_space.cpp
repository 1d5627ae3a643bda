#include "heisenbn/state_space.hpp"

#include <algorithm>
#include <set>

#include "heisenbn/error.hpp"

namespace heisenbn {

std::string CountInterval::label() const {
  if (!upper) return std::to_string(lower) + "+";
  if (*upper == lower) return std::to_string(lower);
  return std::to_string(lower) + "-" + std::to_string(*upper);
}

StateSpace StateSpace::labeled(std::vector<std::string> labels) {
  if (labels.size() < 2) {
    throw Error(ErrorCode::InvalidStateSpace, "a node needs at least two states");
  }
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty()) throw Error(ErrorCode::InvalidStateSpace, "empty state label");
    if (!seen.insert(l).second) {
      throw Error(ErrorCode::InvalidStateSpace, "duplicate state label '" + l + "'");
    }
  }
  StateSpace s;
  s.kind_ = Kind::Labeled;
  s.labels_ = std::move(labels);
  return s;
}

StateSpace StateSpace::ranked5() {
  StateSpace s;
  s.kind_ = Kind::Ranked;
  for (auto l : kRankLabels) s.labels_.emplace_back(l);
  return s;
}

StateSpace StateSpace::counts(std::vector<CountInterval> intervals, double tail_factor) {
  if (intervals.size() < 2) {
    throw Error(ErrorCode::InvalidStateSpace, "a count node needs at least two intervals");
  }
  if (!(tail_factor >= 1.0)) {
    throw Error(ErrorCode::InvalidStateSpace, "tail factor must be >= 1");
  }
  if (intervals.front().lower < 0) {
    throw Error(ErrorCode::InvalidStateSpace, "intervals must be nonnegative");
  }
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& iv = intervals[i];
    const bool last = i + 1 == intervals.size();
    if (!iv.upper && !last) {
      throw Error(ErrorCode::InvalidStateSpace,
                  "only the final interval may be unbounded (interval " +
                      std::to_string(i) + ")");
    }
    if (iv.upper && *iv.upper < iv.lower) {
      throw Error(ErrorCode::InvalidStateSpace,
                  "interval " + std::to_string(i) + " has upper < lower");
    }
    if (!last && intervals[i + 1].lower != *iv.upper + 1) {
      throw Error(ErrorCode::InvalidStateSpace,
                  "intervals must be sorted, disjoint and contiguous (interval " +
                      std::to_string(i + 1) + ")");
    }
  }
  StateSpace s;
  s.kind_ = Kind::Count;
  s.tail_factor_ = tail_factor;
  for (const auto& iv : intervals) s.labels_.push_back(iv.label());
  s.intervals_ = std::move(intervals);
  return s;
}

std::optional<std::size_t> StateSpace::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

double StateSpace::representative(std::size_t i) const {
  if (!has_intervals()) {
    throw Error(ErrorCode::NotAnIntervalNode, "state space has no numeric intervals");
  }
  const auto& iv = intervals_.at(i);
  if (!iv.upper) return tail_factor_ * static_cast<double>(iv.lower);
  return 0.5 * static_cast<double>(iv.lower + *iv.upper);
}

std::vector<double> StateSpace::representatives() const {
  std::vector<double> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(representative(i));
  return out;
}

bool StateSpace::contains_value(double x) const noexcept {
  if (!has_intervals()) return false;
  if (x < static_cast<double>(intervals_.front().lower)) return false;
  const auto& last = intervals_.back();
  return !last.upper || x < static_cast<double>(*last.upper + 1);
}

std::size_t StateSpace::index_for_value(double x) const {
  if (!contains_value(x)) {
    throw Error(ErrorCode::IncompatibleIntervals,
                "value " + std::to_string(x) + " is outside the interval range");
  }
  std::size_t idx = 0;
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    if (static_cast<double>(intervals_[i].lower) <= x) idx = i;
  }
  return idx;
}

std::vector<CountInterval> default_count_intervals() {
  return {{0, 0},     {1, 1},      {2, 2},       {3, 5},
          {6, 10},    {11, 20},    {21, 50},     {51, 100},
          {101, 200}, {201, 500},  {501, std::nullopt}};
}

}  // namespace heisenbn
