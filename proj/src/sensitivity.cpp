#include "heisenbn/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "heisenbn/error.hpp"

namespace heisenbn {

namespace {

std::size_t require_node(const Network& net, std::string_view id) {
  auto idx = net.find(id);
  if (!idx) {
    throw Error(ErrorCode::UnknownNode, "unknown node '" + std::string(id) + "'",
                std::string(id));
  }
  return *idx;
}

void require_summarizable(const Network& net, std::size_t target) {
  if (net.states(target).kind() == StateSpace::Kind::Labeled) {
    throw Error(ErrorCode::TargetNotSummarizable,
                "target has neither count intervals nor an ordinal scale", net.id(target));
  }
}

}  // namespace

double summary_mean(const Network& net, const Marginal& marginal) {
  const auto idx = require_node(net, marginal.node);
  require_summarizable(net, idx);
  if (net.states(idx).has_intervals()) return interval_expectation(marginal).mean;
  double mean = 0.0;
  for (std::size_t i = 0; i < marginal.probabilities.size(); ++i) {
    mean += static_cast<double>(i) * marginal.probabilities[i];
  }
  return mean;
}

SensitivityResult tornado_analysis(const Network& net, const Evidence& base,
                                   std::string_view target,
                                   const std::vector<std::string>& inputs) {
  const auto t = require_node(net, target);
  require_summarizable(net, t);
  base.validate(net);

  SensitivityResult out;
  out.target = std::string(target);
  out.base_mean = summary_mean(net, posterior(net, base, target));
  for (const auto& input : inputs) {
    const auto x = require_node(net, input);
    if (x == t) {
      throw Error(ErrorCode::InvalidEvidence, "input must differ from the target", input);
    }
    InputSensitivity row;
    row.node = input;
    std::optional<double> lo;
    std::optional<double> hi;
    for (const auto& state : net.states(x).labels()) {
      Evidence forced = base;
      forced.set_hard(input, state);
      SweepPoint point{state, std::nullopt};
      try {
        point.mean = summary_mean(net, posterior(net, forced, target));
        lo = std::min(lo.value_or(*point.mean), *point.mean);
        hi = std::max(hi.value_or(*point.mean), *point.mean);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroProbabilityEvidence) throw;
        row.has_impossible_states = true;
      }
      row.points.push_back(std::move(point));
    }
    row.range = lo ? *hi - *lo : 0.0;
    row.mutual_information = mutual_information(net, base, input, target);
    out.inputs.push_back(std::move(row));
  }
  std::stable_sort(out.inputs.begin(), out.inputs.end(),
                   [](const InputSensitivity& a, const InputSensitivity& b) {
                     if (a.range != b.range) return a.range > b.range;
                     return a.node < b.node;
                   });
  return out;
}

double mutual_information(const Network& net, const Evidence& ev, std::string_view x,
                          std::string_view target) {
  const auto xi = require_node(net, x);
  const auto ti = require_node(net, target);
  if (xi == ti) {
    throw Error(ErrorCode::InvalidEvidence, "mutual information needs two distinct nodes",
                std::string(x));
  }
  const std::vector<std::size_t> query = {xi, ti};
  const auto joint = joint_posterior(net, ev, query);
  // Factor variables are sorted by index; the last one varies fastest.
  const std::size_t rows = joint.cards()[0];
  const std::size_t cols = joint.cards()[1];
  const auto& p = joint.values();
  std::vector<double> pr(rows, 0.0);
  std::vector<double> pc(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      pr[r] += p[r * cols + c];
      pc[c] += p[r * cols + c];
    }
  }
  double mi = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = p[r * cols + c];
      if (v > 0.0) mi += v * std::log2(v / (pr[r] * pc[c]));
    }
  }
  return std::max(0.0, mi);
}

}  // namespace heisenbn
