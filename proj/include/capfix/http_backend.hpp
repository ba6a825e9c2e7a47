#pragma once

#include <cstdlib>
#include <string>
#include <string_view>

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "capfix/corrector.hpp"

namespace capfix {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Endpoint split_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos)
    throw BackendError(Errc::BackendUnavailable, "endpoint '" + std::string(url) + "' has no scheme", false);
  const auto slash = url.find('/', scheme_end + 3);
  if (slash == std::string_view::npos) return {std::string(url), "/"};
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

/// Chat-completion client: POSTs {model, messages, temperature} and reads
/// choices[0].message.content. 429 and 5xx are retryable, other 4xx are
/// refusals. The bearer token comes from the environment variable named in
/// the config, never from flags or files.
class HttpChatBackend final : public CompletionBackend {
 public:
  static nlohmann::json request_body(const CompletionRequest& request, const BackendConfig& config) {
    return {{"model", config.model_name},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", config.temperature}};
  }

  static std::string extract_content(std::string_view body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw BackendError(Errc::BackendRefusal, "response is not JSON", false);
    const nlohmann::json::json_pointer ptr("/choices/0/message/content");
    if (!doc.contains(ptr) || !doc.at(ptr).is_string())
      throw BackendError(Errc::BackendRefusal, "response has no choices[0].message.content", false);
    return doc.at(ptr).get<std::string>();
  }

  std::string complete(const CompletionRequest& request, const BackendConfig& config) override {
    const auto ep = split_endpoint(config.endpoint);
    httplib::Client client(ep.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
      const char* key = std::getenv(config.api_key_env.c_str());
      if (!key || !*key)
        throw BackendError(Errc::BackendUnavailable,
                           "environment variable " + config.api_key_env + " is not set", false);
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    const auto res = client.Post(ep.path, headers, request_body(request, config).dump(), "application/json");
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      throw BackendError(timed_out ? Errc::Timeout : Errc::BackendUnavailable,
                         "request to " + config.endpoint + " failed: " + httplib::to_string(err), true);
    }
    if (res->status == 429 || res->status >= 500)
      throw BackendError(Errc::BackendUnavailable, "HTTP " + std::to_string(res->status), true, res->status);
    if (res->status < 200 || res->status >= 300)
      throw BackendError(Errc::BackendRefusal, "HTTP " + std::to_string(res->status) + ": " + res->body, false,
                         res->status);
    return extract_content(res->body);
  }
};

}  // namespace capfix
