#pragma once

#include <memory>
#include <string>

#include "canvas/error.hpp"
#include "canvas/service/community.hpp"

namespace canvas::service {

/// HTTP status for a domain error.
int http_status(ErrorCode code);

/// JSON API over a Service. Requests authenticate with
/// `Authorization: Bearer <token>` from POST /login.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Blocks until stop().
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace canvas::service
