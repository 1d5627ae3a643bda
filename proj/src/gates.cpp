#include "heisenbn/gates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "heisenbn/error.hpp"

namespace heisenbn {

namespace {

// Lower and upper standard normal tails, each accurate in its own tail.
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void normalize_row(std::span<double> row) {
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  for (double& v : row) v /= sum;
}

// P(X >= k) for X ~ Poisson(rate).
double poisson_upper(double rate, std::int64_t k) {
  if (k <= 0) return 1.0;
  return boost::math::gamma_p(static_cast<double>(k), rate);
}

// P(X <= k) for X ~ Poisson(rate).
double poisson_lower(double rate, std::int64_t k) {
  if (k < 0) return 0.0;
  return boost::math::gamma_q(static_cast<double>(k + 1), rate);
}

// P(X >= k) for X ~ Binomial(n, p), 0 < p < 1.
double binomial_upper(std::int64_t n, double p, std::int64_t k) {
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(n - k + 1), p);
}

// P(X <= k) for X ~ Binomial(n, p), 0 < p < 1.
double binomial_lower(std::int64_t n, double p, std::int64_t k) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  return boost::math::ibetac(static_cast<double>(k + 1), static_cast<double>(n - k), p);
}

}  // namespace

std::array<double, 5> truncated_normal_bins(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw Error(ErrorCode::ParameterOutOfRange, "ranked variance must be > 0");
  }
  const double sd = std::sqrt(variance);
  std::array<double, 5> bins{};
  for (std::size_t i = 0; i < 5; ++i) {
    const double za = (0.2 * static_cast<double>(i) - mean) / sd;
    const double zb = (0.2 * static_cast<double>(i + 1) - mean) / sd;
    bins[i] = za >= 0.0 ? normal_sf(za) - normal_sf(zb) : normal_cdf(zb) - normal_cdf(za);
  }
  const double total = std::accumulate(bins.begin(), bins.end(), 0.0);
  if (!(total > 0.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "truncated normal has no mass on [0,1]");
  }
  for (double& b : bins) b /= total;
  return bins;
}

double poisson_interval_mass(double rate, const CountInterval& interval) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::ParameterOutOfRange, "Poisson rate must be > 0");
  }
  const std::int64_t lo = interval.lower;
  if (!interval.upper) return poisson_upper(rate, lo);
  const std::int64_t hi = *interval.upper;
  if (static_cast<double>(lo) > rate) {
    return std::max(0.0, poisson_upper(rate, lo) - poisson_upper(rate, hi + 1));
  }
  return std::max(0.0, poisson_lower(rate, hi) - poisson_lower(rate, lo - 1));
}

double binomial_interval_mass(std::int64_t trials, double p, const CountInterval& interval) {
  if (!is_probability(p)) {
    throw Error(ErrorCode::ParameterOutOfRange, "binomial probability outside [0,1]");
  }
  const std::int64_t lo = interval.lower;
  const std::int64_t hi = interval.upper.value_or(trials);
  if (trials <= 0 || p == 0.0) return (lo <= 0 && 0 <= hi) ? 1.0 : 0.0;
  if (p == 1.0) return (lo <= trials && trials <= hi) ? 1.0 : 0.0;
  if (hi < lo) return 0.0;
  if (static_cast<double>(lo) > static_cast<double>(trials) * p) {
    return std::max(0.0, binomial_upper(trials, p, lo) - binomial_upper(trials, p, hi + 1));
  }
  return std::max(0.0, binomial_lower(trials, p, hi) - binomial_lower(trials, p, lo - 1));
}

std::int64_t thinning_trials(double representative) noexcept {
  return static_cast<std::int64_t>(std::llround(representative));
}

Cpt expand_noisy_or(const NoisyOrCpd& cpd) {
  for (double q : cpd.inhibitors) {
    if (!is_probability(q)) {
      throw Error(ErrorCode::ParameterOutOfRange, "noisy-or inhibitor outside [0,1]");
    }
  }
  if (!is_probability(cpd.leak)) {
    throw Error(ErrorCode::ParameterOutOfRange, "noisy-or leak outside [0,1]");
  }
  const std::size_t n = cpd.inhibitors.size();
  const std::size_t configs = std::size_t{1} << n;
  Cpt cpt(configs, 2);
  for (std::size_t r = 0; r < configs; ++r) {
    double p_false = 1.0 - cpd.leak;
    for (std::size_t i = 0; i < n; ++i) {
      // First parent is the most significant digit; digit 0 means "true".
      const std::size_t digit = (r >> (n - 1 - i)) & 1U;
      if (digit == 0) p_false *= cpd.inhibitors[i];
    }
    cpt.at(r, 0) = 1.0 - p_false;
    cpt.at(r, 1) = p_false;
  }
  return cpt;
}

Cpt expand_ranked(const RankedCpd& cpd, std::size_t parent_count) {
  if (cpd.weights.size() != parent_count) {
    throw Error(ErrorCode::CpdShapeMismatch,
                "ranked CPD has " + std::to_string(cpd.weights.size()) +
                    " weights for " + std::to_string(parent_count) + " parents");
  }
  if (!cpd.inverted.empty() && cpd.inverted.size() != parent_count) {
    throw Error(ErrorCode::CpdShapeMismatch, "ranked CPD inversion flags do not match parents");
  }
  double weight_sum = 0.0;
  for (double w : cpd.weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::ParameterOutOfRange, "ranked weights must be >= 0");
    }
    weight_sum += w;
  }
  if (parent_count > 0 && !(weight_sum > 0.0)) {
    throw Error(ErrorCode::ParameterOutOfRange, "ranked weights are all zero");
  }
  std::size_t configs = 1;
  for (std::size_t i = 0; i < parent_count; ++i) configs *= 5;

  Cpt cpt(configs, 5);
  std::vector<std::size_t> digits(parent_count, 0);
  for (std::size_t r = 0; r < configs; ++r) {
    double mean = 0.5;
    if (parent_count > 0) {
      double acc = 0.0;
      for (std::size_t i = 0; i < parent_count; ++i) {
        double m = rank_midpoint(digits[i]);
        if (!cpd.inverted.empty() && cpd.inverted[i]) m = 1.0 - m;
        acc += cpd.weights[i] * m;
      }
      mean = acc / weight_sum;
    }
    const auto bins = truncated_normal_bins(mean, cpd.variance);
    std::copy(bins.begin(), bins.end(), cpt.row(r).begin());
    for (std::size_t i = parent_count; i-- > 0;) {
      if (++digits[i] < 5) break;
      digits[i] = 0;
    }
  }
  return cpt;
}

void poisson_interval_masses(double rate, std::span<const CountInterval> intervals,
                             std::span<double> out) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::ParameterOutOfRange, "Poisson rate must be > 0");
  }
  const std::size_t k = intervals.size();
  // Tail probabilities at each interval's lower bound, each computed on the
  // side where it is small and complemented on the other.
  std::vector<double> upper(k + 1, 0.0);  // P(X >= lower_i)
  std::vector<double> lower(k + 1, 1.0);  // P(X <  lower_i)
  upper[0] = 1.0;
  lower[0] = 0.0;
  for (std::size_t i = 1; i < k; ++i) {
    const std::int64_t b = intervals[i].lower;
    if (static_cast<double>(b) > rate) {
      upper[i] = poisson_upper(rate, b);
      lower[i] = 1.0 - upper[i];
    } else {
      lower[i] = poisson_lower(rate, b - 1);
      upper[i] = 1.0 - lower[i];
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double m = static_cast<double>(intervals[i].lower) > rate ? upper[i] - upper[i + 1]
                                                                     : lower[i + 1] - lower[i];
    total += (out[i] = std::max(0.0, m));
  }
  for (std::size_t i = 0; i < k; ++i) out[i] /= total;
}

Cpt expand_poisson(const PoissonCpd& cpd, const StateSpace& child) {
  if (!child.has_intervals()) {
    throw Error(ErrorCode::NotAnIntervalNode, "Poisson child must be a count node");
  }
  const auto& ivs = child.intervals();
  if (ivs.front().lower != 0 || ivs.back().upper) {
    throw Error(ErrorCode::IncompatibleIntervals,
                "Poisson child intervals must start at 0 and end unbounded");
  }
  Cpt cpt(cpd.rates.size(), child.size());
  for (std::size_t r = 0; r < cpd.rates.size(); ++r) {
    poisson_interval_masses(cpd.rates[r], ivs, cpt.row(r));
  }
  return cpt;
}

Cpt expand_binomial_thinning(const BinomialCpd& cpd, const StateSpace& count_parent,
                             std::size_t other_configs, const StateSpace& child) {
  if (!count_parent.has_intervals() || !child.has_intervals()) {
    throw Error(ErrorCode::NotAnIntervalNode,
                "binomial thinning needs a count parent and a count child");
  }
  if (cpd.probabilities.size() != other_configs) {
    throw Error(ErrorCode::CpdShapeMismatch,
                "binomial CPD has " + std::to_string(cpd.probabilities.size()) +
                    " probabilities for " + std::to_string(other_configs) +
                    " parent configurations");
  }
  for (double p : cpd.probabilities) {
    if (!is_probability(p)) {
      throw Error(ErrorCode::ParameterOutOfRange, "binomial probability outside [0,1]");
    }
  }
  const auto& ivs = child.intervals();
  if (ivs.front().lower != 0) {
    throw Error(ErrorCode::IncompatibleIntervals, "thinned child intervals must start at 0");
  }
  Cpt cpt(count_parent.size() * other_configs, child.size());
  for (std::size_t n_idx = 0; n_idx < count_parent.size(); ++n_idx) {
    const std::int64_t trials = thinning_trials(count_parent.representative(n_idx));
    if (!child.contains_value(static_cast<double>(trials))) {
      throw Error(ErrorCode::IncompatibleIntervals,
                  "child intervals cannot hold " + std::to_string(trials) + " items");
    }
    for (std::size_t c = 0; c < other_configs; ++c) {
      const std::size_t r = n_idx * other_configs + c;
      for (std::size_t s = 0; s < ivs.size(); ++s) {
        cpt.at(r, s) = binomial_interval_mass(trials, cpd.probabilities[c], ivs[s]);
      }
      normalize_row(cpt.row(r));
    }
  }
  return cpt;
}

Cpt expand_subtract(const StateSpace& minuend, const StateSpace& subtrahend,
                    const StateSpace& child) {
  if (!minuend.has_intervals() || !subtrahend.has_intervals() || !child.has_intervals()) {
    throw Error(ErrorCode::NotAnIntervalNode, "subtraction needs count parents and child");
  }
  Cpt cpt(minuend.size() * subtrahend.size(), child.size());
  for (std::size_t a = 0; a < minuend.size(); ++a) {
    for (std::size_t b = 0; b < subtrahend.size(); ++b) {
      const double diff =
          std::max(0.0, minuend.representative(a) - subtrahend.representative(b));
      if (!child.contains_value(diff)) {
        throw Error(ErrorCode::IncompatibleIntervals,
                    "child intervals cannot hold difference " + std::to_string(diff));
      }
      cpt.at(a * subtrahend.size() + b, child.index_for_value(diff)) = 1.0;
    }
  }
  return cpt;
}

}  // namespace heisenbn
