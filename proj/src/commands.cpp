#include "heisenbn/commands.hpp"

#include <set>
#include <sstream>

#include "heisenbn/error.hpp"

namespace heisenbn::commands {

namespace {

Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

Json marginal_to_json(const Marginal& m) {
  Json out = Json::object();
  out["node"] = m.node;
  out["states"] = m.states;
  out["probabilities"] = numbers(m.probabilities);
  if (m.mean) out["mean"] = *m.mean;
  if (m.variance) out["variance"] = *m.variance;
  return out;
}

Json report_to_json(const PosteriorReport& report) {
  Json list = Json::array();
  for (const auto& m : report.marginals) list.push_back(marginal_to_json(m));
  return Json{{"posteriors", std::move(list)}};
}

Json posteriors(const Network& net, const Evidence& ev, const std::vector<std::string>& targets) {
  if (targets.empty()) throw Error(ErrorCode::SchemaError, "no targets given", "targets");
  return report_to_json(query_posteriors(net, ev, targets));
}

Json predict(const defect::DefectNetwork& dn) {
  return report_to_json(defect::predict_defects(dn).report);
}

Json diagnose(const defect::DefectNetwork& dn, std::int64_t observed_found) {
  Json out = Json::object();
  out["observed_found"] = observed_found;
  out.update(report_to_json(defect::diagnose_from_verification(dn, observed_found)));
  return out;
}

std::vector<std::string> default_sensitivity_inputs(const Network& net,
                                                    const std::string& target) {
  const auto t = net.index_of(target);
  std::set<std::size_t> ancestors;
  std::vector<std::size_t> stack(net.parents(t).begin(), net.parents(t).end());
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    if (!ancestors.insert(n).second) continue;
    for (auto p : net.parents(n)) stack.push_back(p);
  }
  std::vector<std::string> out;
  for (auto i : ancestors) out.push_back(net.id(i));
  return out;
}

Json sensitivity(const Network& net, const Evidence& ev, const std::string& target,
                 std::vector<std::string> inputs) {
  if (inputs.empty()) inputs = default_sensitivity_inputs(net, target);
  const auto r = tornado_analysis(net, ev, target, inputs);
  Json out = Json::object();
  out["target"] = r.target;
  out["base_mean"] = r.base_mean;
  Json rows = Json::array();
  for (const auto& in : r.inputs) {
    Json row = Json::object();
    row["node"] = in.node;
    row["range"] = in.range;
    row["mutual_information"] = in.mutual_information;
    row["has_impossible_states"] = in.has_impossible_states;
    Json points = Json::array();
    for (const auto& p : in.points) {
      points.push_back({{"state", p.state}, {"mean", p.mean ? Json(*p.mean) : Json(nullptr)}});
    }
    row["points"] = std::move(points);
    rows.push_back(std::move(row));
  }
  out["inputs"] = std::move(rows);
  return out;
}

Json fault_tree_top(const FaultTree& tree) {
  Json out = Json::object();
  out["top"] = tree.top;
  out["probability"] = top_event_probability(tree);
  return out;
}

Json fault_tree_diagnose(const FaultTree& tree, const Evidence& observation) {
  Json out = Json::object();
  out["top"] = tree.top;
  Json causes = Json::array();
  for (const auto& c : posterior_cause_ranking(tree, observation)) {
    causes.push_back({{"event", c.event}, {"prior", c.prior}, {"posterior", c.posterior}});
  }
  out["causes"] = std::move(causes);
  return out;
}

Json calibrate(const std::vector<calibration::ProjectRecord>& records,
               const calibration::Priors& priors, const defect::DefectModelParams& init,
               const calibration::FitOptions& options) {
  return io::fit_report_to_json(calibration::fit_parameters(records, priors, init, options));
}

Json what_if(const Network& net, const Evidence& base, const Evidence& overlay,
             const std::vector<std::string>& targets) {
  if (targets.empty()) throw Error(ErrorCode::SchemaError, "no targets given", "targets");
  Evidence combined = base;
  for (const auto& [id, entry] : overlay.entries()) combined.set(id, entry);
  combined.validate(net);
  const auto before = query_posteriors(net, base, targets);
  const auto after = query_posteriors(net, combined, targets);
  Json rows = Json::array();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    // Labeled targets have no numeric summary; their posteriors still appear.
    const bool numeric = net.states(net.index_of(targets[i])).kind() != StateSpace::Kind::Labeled;
    auto mean = [&](const Marginal& m) { return numeric ? Json(summary_mean(net, m)) : Json(nullptr); };
    rows.push_back({{"node", targets[i]},
                    {"base_mean", mean(before.marginals[i])},
                    {"whatif_mean", mean(after.marginals[i])}});
  }
  Json out = Json::object();
  out["targets"] = std::move(rows);
  out.update(report_to_json(after));
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace heisenbn::commands
