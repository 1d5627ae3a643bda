#include "heisenbn/api.hpp"

#include <pthread.h>

#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <thread>
#include <vector>

#include <httplib.h>

#include "heisenbn/commands.hpp"
#include "heisenbn/error.hpp"

namespace heisenbn::api {

namespace node = defect::node;
using io::Json;

struct Service::Entry {
  std::mutex mutex;
  Session session;
};

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
};

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Response json_response(int status, const Json& body) { return {status, io::dump(body)}; }

Response error_response(int status, std::string_view code, const std::string& message,
                        const std::string& path = {}) {
  Json body = Json::object();
  body["code"] = code;
  body["message"] = message;
  body["path"] = path;
  return json_response(status, Json{{"error", std::move(body)}});
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    const auto j = path.find('/', i);
    const auto end = j == std::string::npos ? path.size() : j;
    if (end > i) out.push_back(path.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

template <typename F>
auto with_prefix(const std::string& prefix, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw e.with_path_prefix(prefix);
  }
}

Json session_info(const Session& s) {
  Json out = Json::object();
  out["id"] = s.id;
  out["kind"] = s.source ? "template" : "model";
  out["version"] = s.version;
  out["created"] = s.created;
  out["nodes"] = s.network->size();
  out["evidence"] = io::evidence_to_json(*s.network, s.evidence);
  return out;
}

defect::DefectNetwork template_network(const Session& s) {
  if (!s.source) {
    throw HttpError{400, "SchemaMismatch", "session was not created from a defect scenario"};
  }
  return {*s.network, s.evidence};
}

std::vector<std::string> default_targets(const Session& s) {
  if (!s.source) throw HttpError{400, "SchemaError", "targets are required for this session"};
  return {std::string(node::kDefectsFound), std::string(node::kFieldDefects)};
}

std::string query_param(const Request& r, const std::string& key) {
  auto it = r.query.find(key);
  if (it == r.query.end() || it->second.empty()) {
    throw HttpError{400, "SchemaError", "missing query parameter '" + key + "'"};
  }
  return it->second;
}

}  // namespace

int status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownNode: return 404;
    case ErrorCode::ZeroProbabilityEvidence: return 409;
    default: return is_validation_error(code) ? 400 : 500;
  }
}

Service::Service() : Service(io::ParseOptions{}) {}
Service::Service(io::ParseOptions options) : options_(options) {}
Service::~Service() = default;

std::shared_ptr<Service::Entry> Service::lookup(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw HttpError{404, "UnknownSession", "no session '" + id + "'"};
  return it->second;
}

std::shared_ptr<Service::Entry> Service::add(Session s) {
  std::lock_guard lock(mutex_);
  if (s.id.empty()) {
    do {
      s.id = "s" + std::to_string(next_id_++);
    } while (sessions_.count(s.id));
  }
  auto entry = std::make_shared<Entry>();
  entry->session = std::move(s);
  sessions_[entry->session.id] = entry;
  return entry;
}

Response Service::handle(const Request& r) {
  try {
    const auto parts = split_path(r.path);
    if (parts.empty() || parts[0] != "sessions" || parts.size() > 3) {
      return error_response(404, "NotFound", "no route for '" + r.path + "'");
    }
    auto method_not_allowed = [&] {
      return error_response(405, "MethodNotAllowed", r.method + " not allowed on '" + r.path + "'");
    };

    if (parts.size() == 1) {
      if (r.method != "POST") return method_not_allowed();
      const Json body = io::parse_json(r.body);
      if (!body.is_object()) throw Error(ErrorCode::SchemaError, "expected an object", "");
      if (options_.strict) {
        for (auto it = body.begin(); it != body.end(); ++it) {
          const auto& k = it.key();
          if (k != "model" && k != "evidence" && k != "scenario" && k != "params") {
            throw Error(ErrorCode::SchemaError, "unknown field '" + k + "'", "");
          }
        }
      }
      Session s;
      s.created = now_utc();
      const bool has_model = body.contains("model");
      const bool has_scenario = body.contains("scenario");
      if (has_model == has_scenario) {
        throw Error(ErrorCode::SchemaError, "give exactly one of 'model' or 'scenario'", "");
      }
      if (has_model) {
        if (body.contains("params")) {
          throw Error(ErrorCode::SchemaError, "'params' only applies to a scenario", "/params");
        }
        auto doc = with_prefix("/model", [&] { return io::model_from_json(body["model"], options_); });
        s.network = std::make_shared<const Network>(std::move(doc.network));
        s.source = std::move(doc.template_block);
        if (s.source) {
          s.evidence = defect::build_defect_network(s.source->scenario, s.source->params).evidence;
        }
      } else {
        io::TemplateBlock block;
        block.scenario = with_prefix("/scenario", [&] {
          auto sc = io::scenario_from_json(body["scenario"], options_);
          defect::validate(sc);
          return sc;
        });
        if (body.contains("params")) {
          block.params =
              with_prefix("/params", [&] { return io::params_from_json(body["params"], options_); });
        }
        auto dn = defect::build_defect_network(block.scenario, block.params);
        s.network = std::make_shared<const Network>(std::move(dn.network));
        s.evidence = std::move(dn.evidence);
        s.source = std::move(block);
      }
      if (body.contains("evidence")) {
        s.evidence = with_prefix(
            "/evidence", [&] { return io::evidence_from_json(body["evidence"], *s.network, options_); });
      }
      auto entry = add(std::move(s));
      std::lock_guard lock(entry->mutex);
      return json_response(201, session_info(entry->session));
    }

    auto entry = lookup(parts[1]);
    Session snap;
    {
      std::lock_guard lock(entry->mutex);
      snap = entry->session;
    }
    const std::string action = parts.size() == 3 ? parts[2] : "";

    if (action.empty()) {
      if (r.method != "GET") return method_not_allowed();
      return json_response(200, session_info(snap));
    }
    if (action == "evidence") {
      if (r.method == "GET") return json_response(200, io::evidence_to_json(*snap.network, snap.evidence));
      if (r.method != "PUT") return method_not_allowed();
      auto ev = io::evidence_from_json(io::parse_json(r.body), *snap.network, options_);
      std::lock_guard lock(entry->mutex);
      entry->session.evidence = std::move(ev);
      ++entry->session.version;
      Json out = Json::object();
      out["id"] = entry->session.id;
      out["version"] = entry->session.version;
      return json_response(200, out);
    }
    if (action == "posteriors") {
      if (r.method != "GET") return method_not_allowed();
      const auto targets = commands::split_list(query_param(r, "targets"));
      return json_response(200, commands::posteriors(*snap.network, snap.evidence, targets));
    }
    if (action == "predict") {
      if (r.method != "GET") return method_not_allowed();
      return json_response(200, commands::predict(template_network(snap)));
    }
    if (action == "diagnose") {
      if (r.method != "POST") return method_not_allowed();
      const Json body = io::parse_json(r.body);
      const io::ParseOptions& o = options_;
      if (!body.is_object() || !body.contains("observed_found") ||
          !body["observed_found"].is_number_integer()) {
        throw Error(ErrorCode::SchemaError, "expected {\"observed_found\": <integer>}",
                    "/observed_found");
      }
      if (o.strict && body.size() != 1) {
        throw Error(ErrorCode::SchemaError, "unknown field in diagnose request", "");
      }
      return json_response(
          200, commands::diagnose(template_network(snap), body["observed_found"].get<std::int64_t>()));
    }
    if (action == "whatif") {
      if (r.method != "POST") return method_not_allowed();
      const Json body = io::parse_json(r.body);
      if (!body.is_object()) throw Error(ErrorCode::SchemaError, "expected an object", "");
      Evidence overlay;
      if (body.contains("evidence")) {
        overlay = with_prefix("/evidence", [&] {
          return io::evidence_from_json(body["evidence"], *snap.network, options_);
        });
      } else if (body.contains("node") && body.contains("state") && body["node"].is_string() &&
                 body["state"].is_string()) {
        Json single = Json::object();
        single[body["node"].get<std::string>()] = {{"state", body["state"]}};
        overlay = io::evidence_from_json(single, *snap.network, options_);
      } else {
        throw Error(ErrorCode::SchemaError, "expected 'node' and 'state', or 'evidence'", "");
      }
      if (options_.strict) {
        for (auto it = body.begin(); it != body.end(); ++it) {
          const auto& k = it.key();
          if (k != "node" && k != "state" && k != "evidence" && k != "targets") {
            throw Error(ErrorCode::SchemaError, "unknown field '" + k + "'", "");
          }
        }
      }
      std::vector<std::string> targets;
      if (body.contains("targets")) {
        if (!body["targets"].is_array()) {
          throw Error(ErrorCode::SchemaError, "expected an array", "/targets");
        }
        for (const auto& t : body["targets"]) {
          if (!t.is_string()) throw Error(ErrorCode::SchemaError, "expected a string", "/targets");
          targets.push_back(t.get<std::string>());
        }
      } else {
        targets = default_targets(snap);
      }
      auto out = commands::what_if(*snap.network, snap.evidence, overlay, targets);
      Json wrapped = Json::object();
      wrapped["version"] = snap.version;
      wrapped.update(out);
      return json_response(200, wrapped);
    }
    if (action == "sensitivity") {
      if (r.method != "GET") return method_not_allowed();
      const auto target = query_param(r, "target");
      std::vector<std::string> inputs;
      if (auto it = r.query.find("inputs"); it != r.query.end()) {
        inputs = commands::split_list(it->second);
      }
      return json_response(200,
                           commands::sensitivity(*snap.network, snap.evidence, target, inputs));
    }
    return error_response(404, "NotFound", "no route for '" + r.path + "'");
  } catch (const HttpError& e) {
    return error_response(e.status, e.code, e.message);
  } catch (const Error& e) {
    return json_response(status_for(e.code()), io::error_to_json(e));
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

Json Service::snapshot() const {
  std::vector<std::shared_ptr<Entry>> entries;
  Json out = Json::object();
  {
    std::lock_guard lock(mutex_);
    out["format_version"] = io::kFormatVersion;
    out["next_id"] = next_id_;
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  Json list = Json::array();
  for (const auto& e : entries) {
    std::lock_guard lock(e->mutex);
    const auto& s = e->session;
    Json item = Json::object();
    item["id"] = s.id;
    item["created"] = s.created;
    item["version"] = s.version;
    item["model"] = io::model_to_json(*s.network, s.source);
    item["evidence"] = io::evidence_to_json(*s.network, s.evidence);
    list.push_back(std::move(item));
  }
  out["sessions"] = std::move(list);
  return out;
}

void Service::restore(const Json& doc) {
  if (!doc.is_object() || !doc.contains("sessions") || !doc["sessions"].is_array()) {
    throw Error(ErrorCode::SchemaError, "malformed session snapshot", "/sessions");
  }
  for (std::size_t i = 0; i < doc["sessions"].size(); ++i) {
    const auto& item = doc["sessions"][i];
    with_prefix("/sessions/" + std::to_string(i), [&] {
      Session s;
      s.id = item.at("id").get<std::string>();
      s.created = item.at("created").get<std::string>();
      s.version = item.at("version").get<std::uint64_t>();
      auto model = io::model_from_json(item.at("model"), options_);
      s.network = std::make_shared<const Network>(std::move(model.network));
      s.source = std::move(model.template_block);
      s.evidence = io::evidence_from_json(item.at("evidence"), *s.network, options_);
      add(std::move(s));
      return 0;
    });
  }
  std::lock_guard lock(mutex_);
  if (doc.contains("next_id")) next_id_ = std::max(next_id_, doc["next_id"].get<std::uint64_t>());
}

void serve(Service& service, const std::string& host, int port,
           const std::optional<std::string>& snapshot_path) {
  if (snapshot_path && std::filesystem::exists(*snapshot_path)) {
    service.restore(io::parse_json(io::read_file(*snapshot_path)));
  }

  // Block the shutdown signals here so every server thread inherits the
  // mask, and let one thread wait for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGUSR1);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  httplib::Server server;
  auto forward = [&](const httplib::Request& req, httplib::Response& res) {
    Request r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query[k] = v;
    const auto out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Put(".*", forward);

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  std::cerr << "listening on " << host << ":" << port << "\n";
  const bool ok = server.listen(host, port);
  pthread_kill(waiter.native_handle(), SIGUSR1);
  waiter.join();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);

  if (snapshot_path) io::write_file(*snapshot_path, io::dump(service.snapshot()));
  if (!ok) throw Error(ErrorCode::Io, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace heisenbn::api
