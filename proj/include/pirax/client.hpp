#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "pirax/identity.hpp"
#include "pirax/service.hpp"

namespace pirax {

class Transport {
 public:
  virtual ~Transport() = default;
  // Throws Error(kTransportError) if the authority cannot be reached.
  virtual HttpResponse request(const std::string& method, const std::string& path,
                               const std::string& body) = 0;
};

// Calls a ProviderService in-process.
class LoopbackTransport final : public Transport {
 public:
  explicit LoopbackTransport(ProviderService& service) : service_(service) {}
  HttpResponse request(const std::string& method, const std::string& path, const std::string& body) override;

 private:
  ProviderService& service_;
};

// HTTP/1.1 over TCP. `base_url` like "http://127.0.0.1:8700".
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(const std::string& base_url);
  ~HttpTransport() override;
  HttpResponse request(const std::string& method, const std::string& path, const std::string& body) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Typed client for the authority protocol. Error responses are rethrown as
// Error with the server's code.
class AuthorityClient {
 public:
  AuthorityClient(Transport& transport, std::optional<Key256> channel_key, RandomSource& rng);

  std::string activate_smartphone(const std::string& armored_sars);
  std::string activate_cloud(const std::string& armored_cars);
  // `license_type` is sent as given so servers see exactly what the caller typed.
  void register_entitlement(const ApplicationId& app, const PurchaseToken& purchase,
                            const std::string& license_type);
  bool healthy();

 private:
  std::string post(const std::string& path, const std::string& body);

  Transport& transport_;
  std::optional<Key256> channel_key_;
  std::mutex rng_mutex_;
  RandomSource& rng_;
};

}  // namespace pirax
