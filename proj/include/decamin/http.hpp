#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "decamin/error.hpp"

namespace decamin::http {

/// Connection-level failure (refused, timeout, TLS).
class TransportError : public Error {
 public:
  using Error::Error;
};

struct Response {
  int status = 0;
  std::string body;
};

using Headers = std::multimap<std::string, std::string>;

/// Thin client for one base URL ("http://host:port/path" or https when
/// built with OpenSSL). Not thread-safe; create one per worker.
class Client {
 public:
  explicit Client(const std::string& url, int timeout_s = 30);
  ~Client();
  Client(Client&&) noexcept;
  Client& operator=(Client&&) noexcept;

  Response get(const std::map<std::string, std::string>& query, const Headers& headers = {});
  Response post_json(const std::string& body, const Headers& headers = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string url_encode(std::string_view text);

}  // namespace decamin::http
