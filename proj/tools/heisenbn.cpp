// Command-line front end. Results go to stdout as JSON; errors go to stderr
// as {"error": {...}} with exit code 1 for bad input and 2 for runtime
// failures.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heisenbn/api.hpp"
#include "heisenbn/calibration.hpp"
#include "heisenbn/commands.hpp"
#include "heisenbn/error.hpp"
#include "heisenbn/io.hpp"

namespace {

using namespace heisenbn;
using io::Json;

struct Options {
  std::string model;
  std::string scenario;
  std::string params;
  std::string evidence;
  std::vector<std::string> targets;
  std::string target;
  std::string inputs;
  std::string format = "json";
  std::optional<int> horizon;
  std::int64_t found = 0;
  std::string records;
  std::string priors;
  std::string out;
  std::size_t max_sweeps = calibration::FitOptions{}.max_sweeps;
  std::size_t count = 20;
  std::uint64_t seed = 1;
  std::string fault_tree;
  std::string top_soft;
  std::string top_state;
  std::string kind = "model";
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string snapshot;
};

// Loads a model file or builds the defect network from a scenario, then
// overlays any evidence file.
struct Loaded {
  Network network;
  Evidence evidence;
  std::optional<io::TemplateBlock> source;
};

template <typename F>
auto in_file(const std::string& path, F&& f) {
  try {
    return f(io::read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    throw Error(e.code(), e.message(), e.path().empty() ? path : path + "#" + e.path());
  }
}

defect::DefectModelParams load_params(const Options& o, const io::ParseOptions& po) {
  if (o.params.empty()) return {};
  return in_file(o.params, [&](const std::string& t) { return io::parse_params(t, po); });
}

defect::ProjectScenario load_scenario(const Options& o, const io::ParseOptions& po) {
  auto s = in_file(o.scenario, [&](const std::string& t) { return io::parse_scenario(t, po); });
  if (o.horizon) {
    s.horizon_months = *o.horizon;
    defect::validate(s);
  }
  return s;
}

Loaded load(const Options& o, const io::ParseOptions& po) {
  if (o.model.empty() == o.scenario.empty()) {
    throw Error(ErrorCode::SchemaError, "give exactly one of a model file or --scenario");
  }
  Loaded out;
  if (!o.model.empty()) {
    auto doc = in_file(o.model, [&](const std::string& t) { return io::parse_model_document(t, po); });
    out.network = std::move(doc.network);
    out.source = std::move(doc.template_block);
  } else {
    io::TemplateBlock block{load_scenario(o, po), load_params(o, po)};
    auto dn = defect::build_defect_network(block.scenario, block.params);
    out.network = std::move(dn.network);
    out.evidence = std::move(dn.evidence);
    out.source = std::move(block);
  }
  if (!o.evidence.empty()) {
    const auto extra = in_file(o.evidence, [&](const std::string& t) {
      return io::parse_evidence(t, out.network, po);
    });
    for (const auto& [id, entry] : extra.entries()) out.evidence.set(id, entry);
  }
  return out;
}

void print(const Json& doc) { std::cout << io::dump(doc); }

void print_table(const Json& doc) {
  for (const auto& m : doc["posteriors"]) {
    std::cout << m["node"].get<std::string>();
    if (m.contains("mean")) std::cout << "  (mean " << m["mean"].get<double>() << ")";
    std::cout << "\n";
    for (std::size_t i = 0; i < m["states"].size(); ++i) {
      std::cout << "  " << std::left << std::setw(12) << m["states"][i].get<std::string>()
                << std::fixed << std::setprecision(6) << m["probabilities"][i].get<double>()
                << std::defaultfloat << "\n";
    }
  }
}

// Parses a document of the given kind and returns its canonical text.
std::string canonical(const Options& o, const io::ParseOptions& po) {
  return in_file(o.model, [&](const std::string& text) -> std::string {
    if (o.kind == "model") {
      const auto doc = io::parse_model_document(text, po);
      return io::serialize_model(doc.network, doc.template_block);
    }
    if (o.kind == "scenario") return io::serialize_scenario(io::parse_scenario(text, po));
    if (o.kind == "records") return io::serialize_records(io::parse_records(text, po));
    if (o.kind == "fault-tree") return io::serialize_fault_tree(io::parse_fault_tree_doc(text, po));
    if (o.kind == "params") return io::serialize_params(io::parse_params(text, po));
    if (o.kind == "priors") return io::serialize_priors(io::parse_priors(text, po));
    if (o.kind == "rating-scales") {
      return io::serialize_rating_scales(io::parse_rating_scales(text, po));
    }
    if (o.kind == "evidence") {
      if (o.evidence.empty()) throw Error(ErrorCode::SchemaError, "evidence needs --against <model>");
      const auto net = in_file(o.evidence, [&](const std::string& t) {
        return io::parse_model(t, po);
      });
      return io::serialize_evidence(net, io::parse_evidence(text, net, po));
    }
    throw Error(ErrorCode::SchemaError, "unknown document kind '" + o.kind + "'", "--kind");
  });
}

Evidence top_observation(const Options& o, const FaultTree& tree) {
  Evidence ev;
  if (!o.top_state.empty() == !o.top_soft.empty()) {
    throw Error(ErrorCode::SchemaError, "give exactly one of --top-state or --top-soft");
  }
  if (!o.top_state.empty()) {
    ev.set_hard(tree.top, o.top_state);
    return ev;
  }
  std::vector<double> w;
  for (const auto& item : commands::split_list(o.top_soft)) {
    try {
      std::size_t used = 0;
      w.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidEvidence, "not a number: '" + item + "'", "--top-soft");
    }
  }
  if (w.size() != 2) {
    throw Error(ErrorCode::InvalidEvidence, "--top-soft takes two weights: true,false",
                "--top-soft");
  }
  ev.set_soft(tree.top, w);
  return ev;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Bayesian network toolkit for software defect prediction"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check a document against its schema");
  validate->add_option("file", o.model, "Document to check")->required();
  auto* format = app.add_subcommand("format", "Print a document in canonical form");
  format->add_option("file", o.model, "Document to rewrite")->required();
  for (auto* cmd : {validate, format}) {
    cmd->add_option("--kind", o.kind,
                    "model, scenario, records, fault-tree, params, priors, rating-scales or "
                    "evidence");
    cmd->add_option("--against", o.evidence, "Model the evidence refers to");
  }

  auto* make_template = app.add_subcommand("template", "Write the defect model for a scenario");
  make_template->add_option("--scenario", o.scenario)->required();
  make_template->add_option("--params", o.params);
  make_template->add_option("-o,--out", o.out);
  make_template->add_option("--evidence-out", o.records, "Also write the scenario evidence");

  auto add_source = [&](CLI::App* cmd) {
    cmd->add_option("model", o.model, "Model document");
    cmd->add_option("--scenario", o.scenario, "Build the defect template for this scenario");
    cmd->add_option("--params", o.params, "Template parameters (with --scenario)");
    cmd->add_option("--evidence", o.evidence, "Evidence document applied on top");
  };

  auto* infer = app.add_subcommand("infer", "Posterior marginals");
  add_source(infer);
  infer->add_option("--target", o.targets, "Node id (repeatable)")->required();
  infer->add_option("--format", o.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  auto* predict = app.add_subcommand("predict", "Found and field defect predictions");
  predict->add_option("--scenario", o.scenario)->required();
  predict->add_option("--params", o.params);
  predict->add_option("--horizon-months", o.horizon);

  auto* diagnose = app.add_subcommand("diagnose", "Backward pass from the verification count");
  diagnose->add_option("--scenario", o.scenario)->required();
  diagnose->add_option("--params", o.params);
  diagnose->add_option("--found", o.found)->required();

  auto* sensitivity = app.add_subcommand("sensitivity", "Tornado sweep and mutual information");
  add_source(sensitivity);
  sensitivity->add_option("--target", o.target)->required();
  sensitivity->add_option("--inputs", o.inputs, "Comma-separated ids; default all ancestors");

  auto* calibrate = app.add_subcommand("calibrate", "Fit template parameters to project records");
  calibrate->add_option("--records", o.records)->required();
  calibrate->add_option("--priors", o.priors);
  calibrate->add_option("--params", o.params, "Starting parameters");
  calibrate->add_option("--out", o.out, "Write fitted parameters here");
  calibrate->add_option("--max-sweeps", o.max_sweeps);

  auto* synthesize = app.add_subcommand("synthesize", "Draw project records from parameters");
  synthesize->add_option("--params", o.params);
  synthesize->add_option("--count", o.count);
  synthesize->add_option("--seed", o.seed);
  synthesize->add_option("-o,--out", o.out);

  auto* ft2bn = app.add_subcommand("ft2bn", "Compile a fault tree to a model document");
  ft2bn->add_option("fault_tree", o.fault_tree)->required();
  ft2bn->add_option("-o,--out", o.out);

  auto* ft_top = app.add_subcommand("ft-top", "Top event probability");
  ft_top->add_option("fault_tree", o.fault_tree)->required();

  auto* ft_diagnose = app.add_subcommand("ft-diagnose", "Rank basic events given the top event");
  ft_diagnose->add_option("fault_tree", o.fault_tree)->required();
  ft_diagnose->add_option("--top-soft", o.top_soft, "Likelihood weights true,false");
  ft_diagnose->add_option("--top-state", o.top_state, "true or false");

  auto* serve = app.add_subcommand("serve", "HTTP service");
  serve->add_option("--host", o.host);
  serve->add_option("--port", o.port);
  serve->add_option("--snapshot", o.snapshot, "Session file loaded at start, saved on exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const auto po = io::ParseOptions::from_environment();
  try {
    if (*validate) {
      canonical(o, po);
      print(Json{{"valid", true}, {"kind", o.kind}});
    } else if (*format) {
      std::cout << canonical(o, po);
    } else if (*make_template) {
      const io::TemplateBlock block{load_scenario(o, po), load_params(o, po)};
      const auto dn = defect::build_defect_network(block.scenario, block.params);
      const auto text = io::serialize_model(dn.network, block);
      o.out.empty() ? void(std::cout << text) : io::write_file(o.out, text);
      if (!o.records.empty()) {
        io::write_file(o.records, io::serialize_evidence(dn.network, dn.evidence));
      }
    } else if (*infer) {
      const auto l = load(o, po);
      const auto doc = commands::posteriors(l.network, l.evidence, o.targets);
      o.format == "table" ? print_table(doc) : print(doc);
    } else if (*predict) {
      print(commands::predict(defect::build_defect_network(load_scenario(o, po), load_params(o, po))));
    } else if (*diagnose) {
      print(commands::diagnose(defect::build_defect_network(load_scenario(o, po), load_params(o, po)),
                               o.found));
    } else if (*sensitivity) {
      const auto l = load(o, po);
      print(commands::sensitivity(l.network, l.evidence, o.target, commands::split_list(o.inputs)));
    } else if (*calibrate) {
      const auto records =
          in_file(o.records, [&](const std::string& t) { return io::parse_records(t, po); });
      calibration::Priors priors;
      if (!o.priors.empty()) {
        priors = in_file(o.priors, [&](const std::string& t) { return io::parse_priors(t, po); });
      }
      calibration::FitOptions fit;
      fit.max_sweeps = o.max_sweeps;
      const auto report = calibration::fit_parameters(records, priors, load_params(o, po), fit);
      if (!o.out.empty()) io::write_file(o.out, io::serialize_params(report.params));
      print(io::fit_report_to_json(report));
    } else if (*synthesize) {
      const auto text = io::serialize_records(
          calibration::synthesize_records(load_params(o, po), o.seed, o.count));
      o.out.empty() ? void(std::cout << text) : io::write_file(o.out, text);
    } else if (*ft2bn) {
      const auto tree = in_file(o.fault_tree, [&](const std::string& t) {
        return io::parse_fault_tree_doc(t, po);
      });
      const auto text = io::serialize_model(compile_fault_tree(tree));
      o.out.empty() ? void(std::cout << text) : io::write_file(o.out, text);
    } else if (*ft_top) {
      print(commands::fault_tree_top(in_file(
          o.fault_tree, [&](const std::string& t) { return io::parse_fault_tree_doc(t, po); })));
    } else if (*ft_diagnose) {
      const auto tree = in_file(o.fault_tree, [&](const std::string& t) {
        return io::parse_fault_tree_doc(t, po);
      });
      print(commands::fault_tree_diagnose(tree, top_observation(o, tree)));
    } else if (*serve) {
      api::Service service(po);
      api::serve(service, o.host, o.port,
                 o.snapshot.empty() ? std::nullopt : std::optional<std::string>(o.snapshot));
    }
  } catch (const Error& e) {
    std::cerr << io::dump(io::error_to_json(e));
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << io::dump(Json{{"error", {{"code", "Internal"}, {"message", e.what()}, {"path", ""}}}});
    return 2;
  }
  return 0;
}
