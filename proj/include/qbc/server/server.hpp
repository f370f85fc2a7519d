#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "qbc/report/report.hpp"

namespace httplib {
class Server;
}

namespace qbc {

struct ServerOptions {
  SessionOptions session;
  std::string cors_origin = "*";
  std::string snapshot_dir;  // empty: no snapshots on shutdown
};

/// One live session plus its lock. Mutations take the lock exclusively with
/// try_lock; a second concurrent mutation gets 409.
struct SessionEntry {
  std::string id;
  std::string name;
  std::unique_ptr<Session> session;
  std::shared_mutex mu;
  long long created = 0, updated = 0;
};

class SessionStore {
 public:
  std::shared_ptr<SessionEntry> add(std::unique_ptr<Session> s, std::string name);
  std::shared_ptr<SessionEntry> find(const std::string& id) const;
  bool erase(const std::string& id);
  std::vector<std::shared_ptr<SessionEntry>> all() const;
  /// Writes one JSON file per session (id, name, exported script).
  std::size_t snapshot(const std::string& dir) const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<SessionEntry>> items_;
  unsigned long long counter_ = 0;
};

/// Parses a create-session body: either {"script": "spec ... { }"} or the
/// structured fields name, vars, mode, params, lets, hole, clauses.
SpecDef spec_from_json(const Json& body);
/// Parses a refine body: {"text": "h0 with ..."} or {hole, rule, args, ids}.
RuleApplication application_from_json(const Json& body);

Json session_json(const SessionEntry& e, const ReportOptions& opt = {});
Json rules_json();

/// Registers every endpoint on `srv`.
void install_routes(httplib::Server& srv, SessionStore& store, const ServerOptions& opt);

/// Blocks until stop() is called on the server or SIGINT/SIGTERM arrives.
int run_server(const std::string& host, int port, const ServerOptions& opt);

}  // namespace qbc
