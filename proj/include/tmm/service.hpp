#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "tmm/measure.hpp"
#include "tmm/transform.hpp"
#include "tmm/workspace.hpp"

namespace tmm {

struct ApiSession {
  std::string token;
  MeasurementSession session;
  ViewState view;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Transport-independent HTTP+JSON API over a workspace. All lengths are in
/// meters and times are ISO-8601 UTC. Sessions are created on first use of a
/// token or via POST /api/sessions.
class Service {
 public:
  explicit Service(Workspace& workspace) : workspace_(workspace) {}

  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body);

  /// Exposed for tests.
  std::size_t session_count() const;

 private:
  ApiSession& session_for(const std::string& token);

  Workspace& workspace_;
  mutable std::mutex sessions_mutex_;
  // Mutations through the workspace (save, load, reset, ...) are serialized
  // here; read endpoints go straight to the registry's shared lock.
  std::mutex writer_mutex_;
  std::map<std::string, std::unique_ptr<ApiSession>> sessions_;
  std::uint64_t next_token_ = 1;
};

int http_status_for(ErrorCode code);

/// Owns an HTTP listener on 127.0.0.1 running in a background thread.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds (port 0 picks a free port) and starts serving. Returns the bound
  /// port. Throws PortUnavailable.
  int start(int port);
  void stop();
  /// Blocks until stop() is called from elsewhere.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tmm
