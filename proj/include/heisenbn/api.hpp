#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "heisenbn/defect_model.hpp"
#include "heisenbn/evidence.hpp"
#include "heisenbn/io.hpp"
#include "heisenbn/network.hpp"

namespace heisenbn::api {

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;  // JSON text
};

/// A loaded model plus its committed evidence. Sessions created from a
/// scenario (or from a model carrying a template block) also answer the
/// defect-specific routes.
struct Session {
  std::string id;
  std::shared_ptr<const Network> network;
  std::optional<io::TemplateBlock> source;
  Evidence evidence;
  std::uint64_t version = 0;
  std::string created;
};

/// Routes requests to sessions held in memory. Thread-safe: the session
/// table and each session's evidence are guarded separately, and queries
/// run on a snapshot so that slow inference never blocks writers.
class Service {
 public:
  Service();
  explicit Service(io::ParseOptions options);
  ~Service();

  Response handle(const Request& request);

  /// Everything needed to rebuild the sessions.
  io::Json snapshot() const;
  void restore(const io::Json& doc);

 private:
  struct Entry;

  std::shared_ptr<Entry> lookup(const std::string& id) const;
  std::shared_ptr<Entry> add(Session s);

  io::ParseOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// HTTP status for an error code: 400 validation, 404 unknown node,
/// 409 impossible evidence, 500 otherwise.
int status_for(ErrorCode code) noexcept;

/// Blocks serving HTTP until SIGINT or SIGTERM. With a snapshot path,
/// sessions are loaded from it at start (if present) and written back on
/// shutdown.
void serve(Service& service, const std::string& host, int port,
           const std::optional<std::string>& snapshot_path);

}  // namespace heisenbn::api
