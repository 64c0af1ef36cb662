#include "decamin/http.hpp"

#include <cctype>
#include <cstdio>

#include <httplib.h>

namespace decamin::http {

struct Client::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string path;
};

Client::Client(const std::string& url, int timeout_s) : impl_(std::make_unique<Impl>()) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw TransportError("endpoint URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  impl_->path = path_start == std::string::npos ? "/" : url.substr(path_start);
  impl_->client = std::make_unique<httplib::Client>(origin);
  if (!impl_->client->is_valid()) throw TransportError("unsupported endpoint URL: " + url);
  impl_->client->set_connection_timeout(timeout_s, 0);
  impl_->client->set_read_timeout(timeout_s, 0);
}

Client::~Client() = default;
Client::Client(Client&&) noexcept = default;
Client& Client::operator=(Client&&) noexcept = default;

namespace {

httplib::Headers to_headers(const Headers& headers) { return httplib::Headers(headers.begin(), headers.end()); }

Response finish(const httplib::Result& result) {
  if (!result) throw TransportError("HTTP request failed: " + httplib::to_string(result.error()));
  return Response{result->status, result->body};
}

}  // namespace

Response Client::get(const std::map<std::string, std::string>& query, const Headers& headers) {
  std::string target = impl_->path;
  char sep = target.find('?') == std::string::npos ? '?' : '&';
  for (const auto& [key, value] : query) {
    target += sep;
    target += url_encode(key) + "=" + url_encode(value);
    sep = '&';
  }
  return finish(impl_->client->Get(target, to_headers(headers)));
}

Response Client::post_json(const std::string& body, const Headers& headers) {
  return finish(impl_->client->Post(impl_->path, to_headers(headers), body, "application/json"));
}

std::string url_encode(std::string_view text) {
  std::string out;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(ch);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

}  // namespace decamin::http
