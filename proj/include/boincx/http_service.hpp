#pragma once

// JSON-over-HTTP front end for TrialRegistry.
//
//   POST /trials                         create a trial
//   GET  /trials                         list trial ids
//   GET  /trials/{id}                    full record and audit log
//   POST /trials/{id}/cohorts            {"at": [i, j], "dlt": k, "override": b, "note": s}
//   GET  /trials/{id}/recommendation     current recommendation and last decision
//   GET  /trials/{id}/selection          isotonic fit and MTC (after stop)
//   GET  /trials/{id}/decision-table     boundary table and next-cohort what-if rows
//
// Errors are {"code": ..., "message": ...} with a 4xx/5xx status.

#include <memory>
#include <optional>
#include <string>

#include "boincx/conduct.hpp"

namespace httplib {
class Server;
}

namespace boincx {

class HttpService {
 public:
  // When `token` is set, every request must carry "Authorization: Bearer <token>".
  HttpService(TrialRegistry& registry, std::optional<std::string> token = std::nullopt);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds `host`; port 0 picks an ephemeral port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  TrialRegistry& registry_;
  std::optional<std::string> token_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace boincx
