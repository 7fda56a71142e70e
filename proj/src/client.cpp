#include "pirax/client.hpp"

#include <json.hpp>

#include "pirax/envelope.hpp"

namespace pirax {

using nlohmann::json;

HttpResponse LoopbackTransport::request(const std::string& method, const std::string& path,
                                        const std::string& body) {
  return service_.handle(method, path, body);
}

AuthorityClient::AuthorityClient(Transport& transport, std::optional<Key256> channel_key, RandomSource& rng)
    : transport_(transport), channel_key_(channel_key), rng_(rng) {}

std::string AuthorityClient::post(const std::string& path, const std::string& body) {
  std::string wire = body;
  if (channel_key_) {
    std::lock_guard guard(rng_mutex_);
    wire = seal_envelope(*channel_key_, path, body, rng_);
  }
  HttpResponse response = transport_.request("POST", path, wire);

  std::string plaintext = response.body;
  if (channel_key_ && looks_like_envelope(response.body)) {
    plaintext = open_envelope(*channel_key_, response_aad(path), response.body);
  } else if (channel_key_ && response.status == 200) {
    throw Error(ErrorCode::kEnvelopeRejected, "authority answered in the clear");
  }

  json doc = json::parse(plaintext, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_object()) {
    throw Error(ErrorCode::kTransportError,
                "authority returned HTTP " + std::to_string(response.status) + " with a non-JSON body");
  }
  if (response.status != 200) {
    ErrorCode code = ErrorCode::kTransportError;
    if (!doc.contains("code") || !doc["code"].is_string() ||
        !parse_error_code(doc["code"].get<std::string>(), &code)) {
      code = ErrorCode::kTransportError;
    }
    std::string message = doc.value("message", std::string("HTTP ") + std::to_string(response.status));
    throw Error(code, message);
  }
  return plaintext;
}

std::string AuthorityClient::activate_smartphone(const std::string& armored_sars) {
  json doc = json::parse(post("/v1/activate/smartphone", json{{"sars", armored_sars}}.dump()));
  if (!doc.contains("sas") || !doc["sas"].is_string()) {
    throw Error(ErrorCode::kTransportError, "response lacks 'sas'");
  }
  return doc["sas"].get<std::string>();
}

std::string AuthorityClient::activate_cloud(const std::string& armored_cars) {
  json doc = json::parse(post("/v1/activate/cloud", json{{"cars", armored_cars}}.dump()));
  if (!doc.contains("cas") || !doc["cas"].is_string()) {
    throw Error(ErrorCode::kTransportError, "response lacks 'cas'");
  }
  return doc["cas"].get<std::string>();
}

void AuthorityClient::register_entitlement(const ApplicationId& app, const PurchaseToken& purchase,
                                           const std::string& license_type) {
  post("/v1/entitlements", json{{"app_id", app.to_hex()},
                                {"purchase_token", purchase.to_hex()},
                                {"license_type", license_type}}
                               .dump());
}

bool AuthorityClient::healthy() {
  try {
    return transport_.request("GET", "/v1/health", "").status == 200;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace pirax
