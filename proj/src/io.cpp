#include "heisenbn/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>
#include <variant>

namespace heisenbn::io {

namespace {

[[noreturn]] void schema_error(const std::string& message, const std::string& path) {
  throw Error(ErrorCode::SchemaError,
              message + (path.empty() ? " at the document root" : " at '" + path + "'"), path);
}

// A JSON value together with its document path.
class Node {
 public:
  Node(const Json& j, std::string path, const ParseOptions& options)
      : j_(&j), path_(std::move(path)), options_(&options) {}

  const Json& json() const { return *j_; }
  const std::string& path() const { return path_; }
  const ParseOptions& options() const { return *options_; }
  bool is_null() const { return j_->is_null(); }

  const Node& expect_object() const {
    if (!j_->is_object()) schema_error("expected an object", path_);
    return *this;
  }

  const Node& expect_array() const {
    if (!j_->is_array()) schema_error("expected an array", path_);
    return *this;
  }

  std::optional<Node> find(std::string_view key) const {
    expect_object();
    auto it = j_->find(std::string(key));
    if (it == j_->end()) return std::nullopt;
    return Node(*it, child_path(key), *options_);
  }

  Node at(std::string_view key) const {
    auto n = find(key);
    if (!n) schema_error("missing field '" + std::string(key) + "'", path_);
    return *n;
  }

  Node at(std::size_t i) const { return Node((*j_)[i], path_ + "/" + std::to_string(i), *options_); }

  std::size_t size() const {
    expect_array();
    return j_->size();
  }

  /// Strict mode rejects keys outside `allowed`.
  void allow_only(std::initializer_list<std::string_view> allowed) const {
    expect_object();
    if (!options_->strict) return;
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      bool known = false;
      for (auto a : allowed) known = known || a == it.key();
      if (!known) schema_error("unknown field '" + it.key() + "'", path_);
    }
  }

  double number() const {
    if (!j_->is_number()) schema_error("expected a number", path_);
    return j_->get<double>();
  }

  std::int64_t integer() const {
    if (!j_->is_number_integer()) schema_error("expected an integer", path_);
    return j_->get<std::int64_t>();
  }

  std::string string() const {
    if (!j_->is_string()) schema_error("expected a string", path_);
    return j_->get<std::string>();
  }

  bool boolean() const {
    if (!j_->is_boolean()) schema_error("expected true or false", path_);
    return j_->get<bool>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).string());
    return out;
  }

  template <std::size_t N>
  std::array<double, N> fixed_numbers() const {
    if (size() != N) schema_error("expected " + std::to_string(N) + " numbers", path_);
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = at(i).number();
    return out;
  }

 private:
  std::string child_path(std::string_view key) const { return path_ + "/" + pointer_token(key); }

  const Json* j_;
  std::string path_;
  const ParseOptions* options_;
};

void check_version(const Node& doc) {
  auto v = doc.find("format_version");
  if (!v) {
    if (doc.options().strict) schema_error("missing field 'format_version'", doc.path());
    return;
  }
  if (v->integer() != kFormatVersion) {
    schema_error("unsupported format_version " + std::to_string(v->integer()), v->path());
  }
}

Json numbers_json(const auto& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(v);
  return out;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// Rebases an error whose path is an id onto the document location of that id.
Error relocate(const Error& e, const std::map<std::string, std::string>& locations,
               const std::string& fallback) {
  auto it = locations.find(e.path());
  if (it != locations.end()) return Error(e.code(), e.message(), it->second);
  if (!e.path().empty() && e.path().front() == '/') return e.with_path_prefix(fallback);
  return Error(e.code(), e.message(), e.path().empty() ? fallback : fallback + "/" + e.path());
}

// ---- count intervals ------------------------------------------------------

Json intervals_to_json(const std::vector<CountInterval>& intervals) {
  Json out = Json::array();
  for (const auto& iv : intervals) {
    out.push_back(Json::array({iv.lower, iv.upper ? Json(*iv.upper) : Json(nullptr)}));
  }
  return out;
}

std::vector<CountInterval> intervals_from_json(const Node& n) {
  std::vector<CountInterval> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto item = n.at(i);
    if (item.size() != 2) schema_error("interval must be [lower, upper or null]", item.path());
    CountInterval iv;
    iv.lower = item.at(0).integer();
    if (!item.at(1).is_null()) iv.upper = item.at(1).integer();
    out.push_back(iv);
  }
  return out;
}

// ---- label -> weight maps --------------------------------------------------

template <typename Labels>
Json weights_to_json(const Labels& labels, std::span<const double> weights) {
  Json out = Json::object();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] != 0.0) out[std::string(labels[i])] = weights[i];
  }
  return out;
}

template <typename Labels>
std::vector<double> weights_from_json(const Node& n, const Labels& labels) {
  n.expect_object();
  std::vector<double> out(std::size(labels), 0.0);
  for (auto it = n.json().begin(); it != n.json().end(); ++it) {
    const Node w(it.value(), n.path() + "/" + pointer_token(it.key()), n.options());
    std::size_t idx = 0;
    while (idx < out.size() && labels[idx] != it.key()) ++idx;
    if (idx == out.size()) {
      throw Error(ErrorCode::InvalidEvidence, "unknown state '" + it.key() + "'", w.path());
    }
    const double v = w.number();
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidEvidence, "weights must be finite and >= 0", w.path());
    }
    out[idx] = v;
  }
  return out;
}

template <std::size_t N, typename Labels>
std::array<double, N> distribution_from_json(const Node& n, const Labels& labels) {
  const auto v = weights_from_json(n, labels);
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

// ---- CPDs -----------------------------------------------------------------

Json cpd_to_json(const CpdSpec& cpd) {
  Json out = Json::object();
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, TableCpd>) {
          out["type"] = "table";
          Json rows = Json::array();
          for (const auto& r : c.rows) rows.push_back(numbers_json(r));
          out["rows"] = std::move(rows);
        } else if constexpr (std::is_same_v<T, NoisyOrCpd>) {
          out["type"] = "noisy_or";
          out["q"] = numbers_json(c.inhibitors);
          out["leak"] = c.leak;
        } else if constexpr (std::is_same_v<T, RankedCpd>) {
          out["type"] = "ranked";
          out["weights"] = numbers_json(c.weights);
          out["variance"] = c.variance;
          if (!c.inverted.empty()) {
            Json inv = Json::array();
            for (bool b : c.inverted) inv.push_back(b);
            out["inverted"] = std::move(inv);
          }
        } else if constexpr (std::is_same_v<T, PoissonCpd>) {
          out["type"] = "poisson";
          out["rate_table"] = numbers_json(c.rates);
        } else if constexpr (std::is_same_v<T, BinomialCpd>) {
          out["type"] = "binomial";
          out["p_table"] = numbers_json(c.probabilities);
        } else {
          out["type"] = "subtract";
        }
      },
      cpd);
  return out;
}

CpdSpec cpd_from_json(const Node& n) {
  const auto type = n.at("type").string();
  if (type == "table") {
    n.allow_only({"type", "rows"});
    const auto rows = n.at("rows");
    TableCpd t;
    for (std::size_t i = 0; i < rows.size(); ++i) t.rows.push_back(rows.at(i).numbers());
    return t;
  }
  if (type == "noisy_or") {
    n.allow_only({"type", "q", "leak"});
    NoisyOrCpd c;
    c.inhibitors = n.at("q").numbers();
    if (auto leak = n.find("leak")) c.leak = leak->number();
    return c;
  }
  if (type == "ranked") {
    n.allow_only({"type", "weights", "variance", "inverted"});
    RankedCpd c;
    c.weights = n.at("weights").numbers();
    c.variance = n.at("variance").number();
    if (auto inv = n.find("inverted")) {
      for (std::size_t i = 0; i < inv->size(); ++i) c.inverted.push_back(inv->at(i).boolean());
    }
    return c;
  }
  if (type == "poisson") {
    n.allow_only({"type", "rate_table"});
    return PoissonCpd{n.at("rate_table").numbers()};
  }
  if (type == "binomial") {
    n.allow_only({"type", "p_table"});
    return BinomialCpd{n.at("p_table").numbers()};
  }
  if (type == "subtract") {
    n.allow_only({"type"});
    return SubtractCpd{};
  }
  schema_error("unknown cpd type '" + type + "'", n.path() + "/type");
}

std::string_view kind_name(StateSpace::Kind k) {
  switch (k) {
    case StateSpace::Kind::Labeled: return "labeled";
    case StateSpace::Kind::Ranked: return "ranked5";
    case StateSpace::Kind::Count: return "count";
  }
  return "labeled";
}

Json node_to_json(const NodeSpec& spec) {
  Json out = Json::object();
  out["id"] = spec.id;
  out["kind"] = kind_name(spec.states.kind());
  if (spec.states.kind() == StateSpace::Kind::Labeled) {
    out["states"] = spec.states.labels();
  } else if (spec.states.kind() == StateSpace::Kind::Count) {
    out["intervals"] = intervals_to_json(spec.states.intervals());
    out["tail_factor"] = spec.states.tail_factor();
  }
  out["parents"] = spec.parents;
  out["cpd"] = cpd_to_json(spec.cpd);
  return out;
}

NodeSpec node_from_json(const Node& n) {
  n.expect_object();
  NodeSpec spec;
  spec.id = n.at("id").string();
  const auto kind = n.at("kind").string();
  try {
    if (kind == "labeled") {
      n.allow_only({"id", "kind", "states", "parents", "cpd"});
      spec.states = StateSpace::labeled(n.at("states").strings());
    } else if (kind == "ranked5") {
      n.allow_only({"id", "kind", "parents", "cpd"});
      spec.states = StateSpace::ranked5();
    } else if (kind == "count") {
      n.allow_only({"id", "kind", "intervals", "tail_factor", "parents", "cpd"});
      const auto tail = n.find("tail_factor");
      spec.states = StateSpace::counts(intervals_from_json(n.at("intervals")),
                                       tail ? tail->number() : kDefaultTailFactor);
    } else {
      schema_error("unknown node kind '" + kind + "'", n.path() + "/kind");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    throw Error(e.code(), e.message(), n.path());
  }
  if (auto parents = n.find("parents")) spec.parents = parents->strings();
  spec.cpd = cpd_from_json(n.at("cpd").expect_object());
  return spec;
}

// ---- fault tree -----------------------------------------------------------

std::string gate_kind_name(GateKind k) {
  switch (k) {
    case GateKind::And: return "and";
    case GateKind::Or: return "or";
    case GateKind::NoisyOr: return "noisy_or";
  }
  return "or";
}

}  // namespace

ParseOptions ParseOptions::from_environment() {
  ParseOptions o;
  const char* v = std::getenv("HEISENBN_STRICT");
  if (v != nullptr && std::string_view(v) == "0") o.strict = false;
  return o;
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::SyntaxError, "line " + std::to_string(line) + ", column " +
                                            std::to_string(column) + ": malformed JSON");
  }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'", path);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'", path);
}

std::string pointer_token(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// ---- models ---------------------------------------------------------------

Json model_to_json(const Network& net, const std::optional<TemplateBlock>& block) {
  Json out = Json::object();
  out["format_version"] = kFormatVersion;
  Json nodes = Json::array();
  for (const auto& spec : net.specs()) nodes.push_back(node_to_json(spec));
  out["nodes"] = std::move(nodes);
  if (block) {
    Json t = Json::object();
    t["version"] = defect::kTemplateVersion;
    t["scenario"] = scenario_to_json(block->scenario, false);
    t["params"] = params_to_json(block->params, false);
    out["template"] = std::move(t);
  }
  return out;
}

ModelDocument model_from_json(const Json& doc, const ParseOptions& options) {
  const Node root(doc, "", options);
  root.allow_only({"format_version", "nodes", "template"});
  check_version(root);
  const auto nodes = root.at("nodes");
  std::vector<NodeSpec> specs;
  std::map<std::string, std::string> locations;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    specs.push_back(node_from_json(nodes.at(i)));
    locations.emplace(specs.back().id, nodes.at(i).path());
  }
  ModelDocument out{[&] {
                      try {
                        return Network::build(specs);
                      } catch (const Error& e) {
                        auto moved = relocate(e, locations, "/nodes");
                        if (e.code() == ErrorCode::CpdShapeMismatch) {
                          throw Error(ErrorCode::SchemaError,
                                      "cpd of node '" + e.path() + "': " + e.message(),
                                      moved.path() + "/cpd");
                        }
                        throw moved;
                      }
                    }(),
                    std::nullopt};
  if (auto t = root.find("template")) {
    t->allow_only({"version", "scenario", "params"});
    if (t->at("version").string() != defect::kTemplateVersion) {
      throw Error(ErrorCode::SchemaMismatch, "unsupported template version", t->path() + "/version");
    }
    TemplateBlock block{scenario_from_json(t->at("scenario").json(), options, false),
                        params_from_json(t->at("params").json(), options, false)};
    try {
      defect::validate(block.scenario);
    } catch (const Error& e) {
      throw e.with_path_prefix(t->path() + "/scenario");
    }
    if (defect::build_defect_network(block.scenario, block.params).network != out.network) {
      throw Error(ErrorCode::SchemaMismatch,
                  "nodes differ from the network the template block generates", t->path());
    }
    out.template_block = std::move(block);
  }
  return out;
}

ModelDocument parse_model_document(std::string_view text, const ParseOptions& options) {
  return model_from_json(parse_json(text), options);
}

Network parse_model(std::string_view text, const ParseOptions& options) {
  return parse_model_document(text, options).network;
}

std::string serialize_model(const Network& net, const std::optional<TemplateBlock>& block) {
  return dump(model_to_json(net, block));
}

// ---- evidence -------------------------------------------------------------

Json evidence_to_json(const Network& net, const Evidence& ev) {
  Json out = Json::object();
  for (const auto& [id, entry] : ev.entries()) {
    Json e = Json::object();
    if (const auto* hard = std::get_if<HardEvidence>(&entry)) {
      e["state"] = hard->state;
    } else {
      const auto& labels = net.states(net.index_of(id)).labels();
      e["soft"] = weights_to_json(labels, std::get<SoftEvidence>(entry).likelihood);
    }
    out[id] = std::move(e);
  }
  return out;
}

Evidence evidence_from_json(const Json& doc, const Network& net, const ParseOptions& options) {
  const Node root(doc, "", options);
  root.expect_object();
  Evidence ev;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const Node entry(it.value(), "/" + pointer_token(it.key()), options);
    const auto idx = net.find(it.key());
    if (!idx) throw Error(ErrorCode::UnknownNode, "unknown node '" + it.key() + "'", entry.path());
    entry.expect_object();
    const auto state = entry.find("state");
    const auto soft = entry.find("soft");
    if (static_cast<bool>(state) == static_cast<bool>(soft)) {
      schema_error("evidence needs exactly one of 'state' or 'soft'", entry.path());
    }
    entry.allow_only({"state", "soft"});
    if (state) {
      const auto s = state->string();
      if (!net.states(*idx).index_of(s)) {
        throw Error(ErrorCode::InvalidEvidence, "unknown state '" + s + "'", state->path());
      }
      ev.set_hard(it.key(), s);
    } else {
      auto w = weights_from_json(*soft, net.states(*idx).labels());
      double total = 0.0;
      for (double x : w) total += x;
      if (!(total > 0.0)) {
        throw Error(ErrorCode::InvalidEvidence, "soft weights are all zero", soft->path());
      }
      ev.set_soft(it.key(), std::move(w));
    }
  }
  return ev;
}

Evidence parse_evidence(std::string_view text, const Network& net, const ParseOptions& options) {
  return evidence_from_json(parse_json(text), net, options);
}

std::string serialize_evidence(const Network& net, const Evidence& ev) {
  return dump(evidence_to_json(net, ev));
}

// ---- scenarios ------------------------------------------------------------

Json scenario_to_json(const defect::ProjectScenario& s, bool with_version) {
  Json out = Json::object();
  if (with_version) out["format_version"] = kFormatVersion;
  out["name"] = s.name;
  out["kloc"] = s.kloc;
  out["hours_booked"] = s.hours_booked;
  out["horizon_months"] = s.horizon_months;
  if (s.certification) out["certification"] = *s.certification;
  Json answers = Json::array();
  for (const auto& a : s.answers) {
    answers.push_back(
        {{"dimension", a.dimension}, {"distribution", weights_to_json(kRankLabels, a.distribution)}});
  }
  out["answers"] = std::move(answers);
  out["complexity"] = {{"distribution", weights_to_json(kRankLabels, s.complexity.distribution)}};
  out["usage"] = weights_to_json(defect::kUsageLabels, s.usage);
  return out;
}

defect::ProjectScenario scenario_from_json(const Json& doc, const ParseOptions& options,
                                           bool top_level) {
  const Node root(doc, "", options);
  if (top_level) {
    root.allow_only({"format_version", "name", "kloc", "hours_booked", "horizon_months",
                     "certification", "answers", "complexity", "usage"});
    check_version(root);
  } else {
    root.allow_only({"name", "kloc", "hours_booked", "horizon_months", "certification", "answers",
                     "complexity", "usage"});
  }
  defect::ProjectScenario s;
  if (auto name = root.find("name")) s.name = name->string();
  s.kloc = root.at("kloc").number();
  s.hours_booked = root.at("hours_booked").number();
  if (auto h = root.find("horizon_months")) {
    const auto v = h->integer();
    if (v < 1 || v > std::numeric_limits<int>::max()) {
      throw Error(ErrorCode::ParameterOutOfRange, "horizon_months must be >= 1", h->path());
    }
    s.horizon_months = static_cast<int>(v);
  }
  if (auto c = root.find("certification"); c && !c->is_null()) s.certification = c->string();
  const auto answers = root.at("answers");
  for (std::size_t i = 0; i < answers.size(); ++i) {
    const auto a = answers.at(i);
    a.allow_only({"dimension", "distribution"});
    s.answers.push_back({a.at("dimension").string(),
                         distribution_from_json<5>(a.at("distribution"), kRankLabels)});
  }
  if (auto c = root.find("complexity")) {
    c->allow_only({"distribution"});
    s.complexity.distribution = distribution_from_json<5>(c->at("distribution"), kRankLabels);
  }
  if (auto u = root.find("usage")) s.usage = distribution_from_json<5>(*u, defect::kUsageLabels);
  return s;
}

defect::ProjectScenario parse_scenario(std::string_view text, const ParseOptions& options) {
  auto s = scenario_from_json(parse_json(text), options);
  defect::validate(s);
  return s;
}

std::string serialize_scenario(const defect::ProjectScenario& s) {
  return dump(scenario_to_json(s));
}

// ---- records --------------------------------------------------------------

Json records_to_json(const std::vector<calibration::ProjectRecord>& records) {
  Json out = Json::object();
  out["format_version"] = kFormatVersion;
  Json list = Json::array();
  for (const auto& r : records) {
    Json item = Json::object();
    item["scenario"] = scenario_to_json(r.scenario, false);
    item["observed_found"] = r.observed_found;
    item["observed_field"] = r.observed_field ? Json(*r.observed_field) : Json(nullptr);
    list.push_back(std::move(item));
  }
  out["records"] = std::move(list);
  return out;
}

std::vector<calibration::ProjectRecord> records_from_json(const Json& doc,
                                                          const ParseOptions& options) {
  const Node root(doc, "", options);
  root.allow_only({"format_version", "records"});
  check_version(root);
  const auto list = root.at("records");
  std::vector<calibration::ProjectRecord> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto item = list.at(i);
    item.allow_only({"scenario", "observed_found", "observed_field"});
    calibration::ProjectRecord r;
    const auto sc = item.at("scenario");
    try {
      r.scenario = scenario_from_json(sc.json(), options, false);
    } catch (const Error& e) {
      throw e.with_path_prefix(sc.path());
    }
    r.observed_found = item.at("observed_found").integer();
    if (auto f = item.find("observed_field"); f && !f->is_null()) r.observed_field = f->integer();
    try {
      calibration::validate(r);
    } catch (const Error& e) {
      const bool count_field = e.path().rfind("/observed", 0) == 0;
      throw e.with_path_prefix(count_field ? item.path() : sc.path());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<calibration::ProjectRecord> parse_records(std::string_view text,
                                                      const ParseOptions& options) {
  return records_from_json(parse_json(text), options);
}

std::string serialize_records(const std::vector<calibration::ProjectRecord>& records) {
  return dump(records_to_json(records));
}

// ---- fault trees ----------------------------------------------------------

Json fault_tree_to_json(const FaultTree& tree) {
  Json out = Json::object();
  out["format_version"] = kFormatVersion;
  out["top"] = tree.top;
  Json events = Json::array();
  for (const auto& e : tree.events) events.push_back({{"id", e.id}, {"probability", e.probability}});
  out["events"] = std::move(events);
  Json gates = Json::array();
  for (const auto& g : tree.gates) {
    Json item = Json::object();
    item["id"] = g.id;
    item["kind"] = gate_kind_name(g.kind);
    item["children"] = g.children;
    if (g.kind == GateKind::NoisyOr) {
      item["q"] = numbers_json(g.inhibitors);
      item["leak"] = g.leak;
    }
    gates.push_back(std::move(item));
  }
  out["gates"] = std::move(gates);
  return out;
}

FaultTree fault_tree_from_json(const Json& doc, const ParseOptions& options) {
  const Node root(doc, "", options);
  root.allow_only({"format_version", "top", "events", "gates"});
  check_version(root);
  FaultTree tree;
  tree.top = root.at("top").string();
  std::map<std::string, std::string> locations;
  const auto events = root.at("events");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto e = events.at(i);
    e.allow_only({"id", "probability"});
    tree.events.push_back({e.at("id").string(), e.at("probability").number()});
    locations.emplace(tree.events.back().id, e.path());
  }
  const auto gates = root.at("gates");
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto g = gates.at(i);
    g.allow_only({"id", "kind", "children", "q", "leak"});
    Gate gate;
    gate.id = g.at("id").string();
    const auto kind = g.at("kind").string();
    if (kind == "and") {
      gate.kind = GateKind::And;
    } else if (kind == "or") {
      gate.kind = GateKind::Or;
    } else if (kind == "noisy_or") {
      gate.kind = GateKind::NoisyOr;
    } else {
      schema_error("unknown gate kind '" + kind + "'", g.path() + "/kind");
    }
    gate.children = g.at("children").strings();
    if (auto q = g.find("q")) gate.inhibitors = q->numbers();
    if (auto leak = g.find("leak")) gate.leak = leak->number();
    locations.emplace(gate.id, g.path());
    tree.gates.push_back(std::move(gate));
  }
  try {
    validate(tree);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownNode && e.path() == tree.top) {
      throw Error(e.code(), e.message(), "/top");
    }
    throw relocate(e, locations, "");
  }
  return tree;
}

FaultTree parse_fault_tree_doc(std::string_view text, const ParseOptions& options) {
  return fault_tree_from_json(parse_json(text), options);
}

std::string serialize_fault_tree(const FaultTree& tree) { return dump(fault_tree_to_json(tree)); }

// ---- params ---------------------------------------------------------------

Json params_to_json(const defect::DefectModelParams& p, bool with_version) {
  Json out = Json::object();
  if (with_version) out["format_version"] = kFormatVersion;
  out["template_version"] = defect::kTemplateVersion;
  out["insertion_rates"] = numbers_json(p.insertion_rates);
  out["detection"] = numbers_json(p.detection);
  out["certification_uplift"] = numbers_json(p.certification_uplift);
  out["manifestation"] = numbers_json(p.manifestation);
  out["complexity_multipliers"] = numbers_json(p.complexity_multipliers);
  out["complexity_factors"] = numbers_json(p.complexity_factors);
  out["size_factors"] = numbers_json(p.size_factors);
  out["effective_kloc_thresholds"] = numbers_json(p.effective_kloc_thresholds);
  out["hours_thresholds"] = numbers_json(p.hours_thresholds);
  Json ranked = Json::object();
  for (const auto& [id, r] : p.ranked) {
    ranked[id] = {{"weights", numbers_json(r.weights)}, {"variance", r.variance}};
  }
  out["ranked"] = std::move(ranked);
  out["count_intervals"] = intervals_to_json(p.count_intervals);
  out["tail_factor"] = p.tail_factor;
  return out;
}

defect::DefectModelParams params_from_json(const Json& doc, const ParseOptions& options,
                                           bool top_level) {
  const Node root(doc, "", options);
  if (top_level) {
    root.allow_only({"format_version", "template_version", "insertion_rates", "detection",
                     "certification_uplift", "manifestation", "complexity_multipliers",
                     "complexity_factors", "size_factors", "effective_kloc_thresholds",
                     "hours_thresholds", "ranked", "count_intervals", "tail_factor"});
    check_version(root);
  } else {
    root.allow_only({"template_version", "insertion_rates", "detection", "certification_uplift",
                     "manifestation", "complexity_multipliers", "complexity_factors",
                     "size_factors", "effective_kloc_thresholds", "hours_thresholds", "ranked",
                     "count_intervals", "tail_factor"});
  }
  if (auto v = root.find("template_version"); v && v->string() != defect::kTemplateVersion) {
    throw Error(ErrorCode::SchemaMismatch, "parameters target template '" + v->string() + "'",
                v->path());
  }
  defect::DefectModelParams p;
  auto read = [&](std::string_view key, auto& target) {
    if (auto n = root.find(key)) {
      target = n->fixed_numbers<std::tuple_size_v<std::decay_t<decltype(target)>>>();
    }
  };
  read("insertion_rates", p.insertion_rates);
  read("detection", p.detection);
  read("certification_uplift", p.certification_uplift);
  read("manifestation", p.manifestation);
  read("complexity_multipliers", p.complexity_multipliers);
  read("complexity_factors", p.complexity_factors);
  read("size_factors", p.size_factors);
  read("effective_kloc_thresholds", p.effective_kloc_thresholds);
  read("hours_thresholds", p.hours_thresholds);
  if (auto ranked = root.find("ranked")) {
    ranked->expect_object();
    p.ranked.clear();
    for (auto it = ranked->json().begin(); it != ranked->json().end(); ++it) {
      const Node r(it.value(), ranked->path() + "/" + pointer_token(it.key()), options);
      r.allow_only({"weights", "variance"});
      defect::RankedParams rp;
      rp.weights = r.at("weights").numbers();
      if (auto var = r.find("variance")) rp.variance = var->number();
      p.ranked[it.key()] = std::move(rp);
    }
  }
  if (auto iv = root.find("count_intervals")) p.count_intervals = intervals_from_json(*iv);
  if (auto t = root.find("tail_factor")) p.tail_factor = t->number();
  try {
    defect::validate(p);
  } catch (const Error& e) {
    if (e.path().empty() || e.path().front() == '/') throw;
    throw Error(e.code(), e.message(), "/ranked/" + pointer_token(e.path()));
  }
  return p;
}

defect::DefectModelParams parse_params(std::string_view text, const ParseOptions& options) {
  return params_from_json(parse_json(text), options);
}

std::string serialize_params(const defect::DefectModelParams& params) {
  return dump(params_to_json(params));
}

// ---- priors ---------------------------------------------------------------

Json priors_to_json(const calibration::Priors& priors) {
  Json out = Json::object();
  out["format_version"] = kFormatVersion;
  out["pseudo_count"] = priors.pseudo_count;
  out["rate_min"] = priors.rate_min;
  out["rate_max"] = priors.rate_max;
  Json beta = Json::object();
  for (const auto& [key, b] : priors.beta) beta[key] = {{"alpha", b.alpha}, {"beta", b.beta}};
  out["beta"] = std::move(beta);
  return out;
}

calibration::Priors priors_from_json(const Json& doc, const ParseOptions& options) {
  const Node root(doc, "", options);
  root.allow_only({"format_version", "pseudo_count", "rate_min", "rate_max", "beta"});
  check_version(root);
  calibration::Priors p;
  if (auto n = root.find("pseudo_count")) p.pseudo_count = n->number();
  if (auto n = root.find("rate_min")) p.rate_min = n->number();
  if (auto n = root.find("rate_max")) p.rate_max = n->number();
  if (auto beta = root.find("beta")) {
    beta->expect_object();
    for (auto it = beta->json().begin(); it != beta->json().end(); ++it) {
      const Node b(it.value(), beta->path() + "/" + pointer_token(it.key()), options);
      const auto& key = it.key();
      const auto slash = key.find('/');
      const auto group = key.substr(0, slash);
      bool ok = slash != std::string::npos && (group == "detection" || group == "manifestation") &&
                key.size() == slash + 2 && key[slash + 1] >= '0' && key[slash + 1] <= '4';
      if (!ok) schema_error("expected 'detection/<0-4>' or 'manifestation/<0-4>'", b.path());
      b.allow_only({"alpha", "beta"});
      p.beta[key] = {b.at("alpha").number(), b.at("beta").number()};
    }
  }
  calibration::validate(p);
  return p;
}

calibration::Priors parse_priors(std::string_view text, const ParseOptions& options) {
  return priors_from_json(parse_json(text), options);
}

std::string serialize_priors(const calibration::Priors& priors) {
  return dump(priors_to_json(priors));
}

// ---- rating scales --------------------------------------------------------

Json rating_scales_to_json(const std::vector<defect::RatingScale>& scales) {
  Json out = Json::object();
  out["format_version"] = kFormatVersion;
  Json list = Json::array();
  for (const auto& s : scales) {
    Json criteria = Json::object();
    for (std::size_t i = 0; i < 5; ++i) criteria[std::string(kRankLabels[i])] = s.criteria[i];
    list.push_back({{"dimension", s.dimension}, {"criteria", std::move(criteria)}});
  }
  out["scales"] = std::move(list);
  return out;
}

std::vector<defect::RatingScale> rating_scales_from_json(const Json& doc,
                                                         const ParseOptions& options) {
  const Node root(doc, "", options);
  root.allow_only({"format_version", "scales"});
  check_version(root);
  const auto list = root.at("scales");
  std::vector<defect::RatingScale> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto item = list.at(i);
    item.allow_only({"dimension", "criteria"});
    defect::RatingScale s;
    s.dimension = item.at("dimension").string();
    const auto criteria = item.at("criteria");
    criteria.allow_only({"VeryLow", "Low", "Medium", "High", "VeryHigh"});
    for (std::size_t l = 0; l < 5; ++l) s.criteria[l] = criteria.at(kRankLabels[l]).string();
    try {
      defect::validate(s);
    } catch (const Error& e) {
      throw Error(e.code(), e.message(), item.path());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<defect::RatingScale> parse_rating_scales(std::string_view text,
                                                     const ParseOptions& options) {
  return rating_scales_from_json(parse_json(text), options);
}

std::string serialize_rating_scales(const std::vector<defect::RatingScale>& scales) {
  return dump(rating_scales_to_json(scales));
}

// ---- reports --------------------------------------------------------------

Json fit_report_to_json(const calibration::FitReport& r) {
  Json out = Json::object();
  out["objective_before"] = finite_or_null(r.objective_before);
  out["objective_after"] = finite_or_null(r.objective_after);
  out["log_likelihood_before"] = finite_or_null(r.log_likelihood_before);
  out["log_likelihood_after"] = finite_or_null(r.log_likelihood_after);
  out["sweeps"] = r.sweeps;
  out["non_improving"] = r.non_improving;
  Json records = Json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"name", rec.name},
                       {"log_likelihood_before", finite_or_null(rec.log_likelihood_before)},
                       {"log_likelihood_after", finite_or_null(rec.log_likelihood_after)}});
  }
  out["records"] = std::move(records);
  Json deltas = Json::array();
  for (const auto& d : r.deltas) {
    deltas.push_back({{"parameter", d.parameter}, {"before", d.before}, {"after", d.after}});
  }
  out["deltas"] = std::move(deltas);
  out["params"] = params_to_json(r.params);
  return out;
}

Json error_to_json(const Error& e) {
  Json body = Json::object();
  body["code"] = to_string(e.code());
  body["message"] = e.message();
  body["path"] = e.path();
  return Json{{"error", std::move(body)}};
}

}  // namespace heisenbn::io
