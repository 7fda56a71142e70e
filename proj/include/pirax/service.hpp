#pragma once

// HTTP/JSON front end of the license authority.
//
//   POST /v1/activate/smartphone  {"sars": "<armored>"} -> {"sas": "<armored>"}
//   POST /v1/activate/cloud       {"cars": "<armored>"} -> {"cas": "<armored>"}
//   POST /v1/entitlements         {"app_id", "purchase_token", "license_type"} -> {"status": "ok"}
//   GET  /v1/health               -> {"status": "ok"}
//
// Errors are {"code": "<ErrorCode name>", "message": "..."}. With a channel
// key configured, POST bodies in both directions are sealed envelopes; a body
// that fails to open is rejected before any serial is decoded.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "pirax/authority.hpp"
#include "pirax/crypto.hpp"

namespace pirax {

struct HttpResponse {
  int status = 200;
  std::string body;
};

int http_status_for(ErrorCode code);

class ProviderService {
 public:
  // `channel_key` enables envelope mode. `rng` supplies response nonces.
  ProviderService(LicenseAuthority& authority, std::optional<Key256> channel_key, RandomSource& rng);

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  bool envelope_enabled() const { return channel_key_.has_value(); }

 private:
  std::string dispatch(std::string_view path, std::string_view body);
  std::string seal(std::string_view path, std::string_view plaintext);

  LicenseAuthority& authority_;
  std::optional<Key256> channel_key_;
  std::mutex rng_mutex_;
  RandomSource& rng_;
};

// Binds `service` to a TCP listener.
class HttpServer {
 public:
  explicit HttpServer(ProviderService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port. Throws
  // Error(kTransportError) if the address cannot be bound.
  int bind(const std::string& host, int port);
  // Serves on the calling thread until stop().
  void run();
  // Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pirax
