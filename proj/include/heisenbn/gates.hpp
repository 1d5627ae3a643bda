#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "heisenbn/cpd.hpp"
#include "heisenbn/state_space.hpp"

namespace heisenbn {

/// Midpoint of ordinal bin `state` (0..4) on [0,1].
constexpr double rank_midpoint(std::size_t state) noexcept {
  return 0.1 + 0.2 * static_cast<double>(state);
}

/// Normal(mean, variance) truncated to [0,1] and integrated over the five
/// ordinal bins. Exact up to the accuracy of erfc.
std::array<double, 5> truncated_normal_bins(double mean, double variance);

/// Probability that a Poisson(rate) variable falls in `interval`.
double poisson_interval_mass(double rate, const CountInterval& interval);

/// Masses of Poisson(rate) over contiguous intervals starting at 0 and
/// ending unbounded, normalized to sum to 1. Used for CPT rows.
void poisson_interval_masses(double rate, std::span<const CountInterval> intervals,
                             std::span<double> out);

/// Probability that a Binomial(trials, p) variable falls in `interval`.
double binomial_interval_mass(std::int64_t trials, double p, const CountInterval& interval);

/// Integer trial count used when thinning a count whose interval
/// representative is `representative`.
std::int64_t thinning_trials(double representative) noexcept;

Cpt expand_noisy_or(const NoisyOrCpd& cpd);

Cpt expand_ranked(const RankedCpd& cpd, std::size_t parent_count);

Cpt expand_poisson(const PoissonCpd& cpd, const StateSpace& child);

/// `other_configs` is the number of joint configurations of the parents
/// following the count parent; it must equal cpd.probabilities.size().
Cpt expand_binomial_thinning(const BinomialCpd& cpd, const StateSpace& count_parent,
                             std::size_t other_configs, const StateSpace& child);

Cpt expand_subtract(const StateSpace& minuend, const StateSpace& subtrahend,
                    const StateSpace& child);

}  // namespace heisenbn
