#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace heisenbn {

/// Nonnegative table over a sorted set of variable indices; the last
/// variable varies fastest.
class Factor {
 public:
  Factor() : values_{1.0} {}
  Factor(std::vector<std::size_t> vars, std::vector<std::size_t> cards,
         std::vector<double> values);

  static Factor unit() { return Factor(); }

  const std::vector<std::size_t>& vars() const noexcept { return vars_; }
  const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  bool contains(std::size_t var) const noexcept;

  Factor operator*(const Factor& other) const;
  Factor sum_out(std::size_t var) const;
  double total() const noexcept;

 private:
  std::vector<std::size_t> vars_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

}  // namespace heisenbn
