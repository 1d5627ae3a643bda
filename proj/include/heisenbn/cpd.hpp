#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace heisenbn {

/// Explicit conditional probability table: one row per parent configuration
/// (mixed radix, first parent most significant), one column per child state.
struct TableCpd {
  std::vector<std::vector<double>> rows;
  friend bool operator==(const TableCpd&, const TableCpd&) = default;
};

/// Binary child over binary parents; state 0 of every node is "true".
/// P(child = false | x) = (1 - leak) * prod_{i : x_i true} inhibitors[i].
struct NoisyOrCpd {
  std::vector<double> inhibitors;
  double leak = 0.0;
  friend bool operator==(const NoisyOrCpd&, const NoisyOrCpd&) = default;
};

/// Five-state ordinal child over five-state ordinal parents. The child is a
/// truncated Normal on [0,1] centred on the weighted mean of parent bin
/// midpoints. An inverted parent contributes 1 - midpoint.
struct RankedCpd {
  std::vector<double> weights;
  double variance = 0.01;
  std::vector<bool> inverted;  // empty, or one flag per parent
  friend bool operator==(const RankedCpd&, const RankedCpd&) = default;
};

/// Count child, Poisson(rates[config]) folded into the child's intervals.
struct PoissonCpd {
  std::vector<double> rates;
  friend bool operator==(const PoissonCpd&, const PoissonCpd&) = default;
};

/// Count child thinning the first parent (a count node): each of the n
/// parent items survives with probability probabilities[config], where config
/// ranges over the remaining parents.
struct BinomialCpd {
  std::vector<double> probabilities;
  friend bool operator==(const BinomialCpd&, const BinomialCpd&) = default;
};

/// Count child = max(0, first parent - second parent), deterministic.
struct SubtractCpd {
  friend bool operator==(const SubtractCpd&, const SubtractCpd&) = default;
};

using CpdSpec =
    std::variant<TableCpd, NoisyOrCpd, RankedCpd, PoissonCpd, BinomialCpd, SubtractCpd>;

/// Dense row-major CPT.
struct Cpt {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Cpt() = default;
  Cpt(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  std::span<double> row(std::size_t r) { return {values.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

}  // namespace heisenbn
