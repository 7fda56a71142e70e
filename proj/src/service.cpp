#include "pirax/service.hpp"

#include <json.hpp>

#include "pirax/envelope.hpp"

namespace pirax {
namespace {

using nlohmann::json;

std::string error_body(ErrorCode code, std::string_view message) {
  return json{{"code", to_string(code)}, {"message", message}}.dump();
}

std::string required_string(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end() || !it->is_string()) {
    throw Error(ErrorCode::kValidationError, std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

LicenseType license_type_field(const json& doc) {
  auto it = doc.find("license_type");
  if (it == doc.end()) throw Error(ErrorCode::kValidationError, "field 'license_type' is required");
  if (it->is_number_unsigned()) {
    auto v = it->get<std::uint64_t>();
    if (v > 0xff) throw Error(ErrorCode::kValidationError, "license_type byte out of range");
    return license_type_from_byte(static_cast<std::uint8_t>(v));
  }
  if (it->is_string()) return parse_license_type(it->get<std::string>());
  throw Error(ErrorCode::kValidationError, "license_type must be a name or a byte");
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kImeiMalformed:
    case ErrorCode::kImeiChecksumFailed:
    case ErrorCode::kUuidMalformed:
    case ErrorCode::kUuidNil:
    case ErrorCode::kHexMalformed:
    case ErrorCode::kArmorMalformed:
    case ErrorCode::kSerialMalformed:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kValidationError:
    case ErrorCode::kAppIdMismatch:
    case ErrorCode::kEnvelopeRejected:
      return 400;
    case ErrorCode::kTokenMacMismatch:
    case ErrorCode::kLicenseTypeInsufficient:
      return 403;
    case ErrorCode::kEntitlementNotFound:
    case ErrorCode::kUnknownSas:
    case ErrorCode::kNotFound:
    case ErrorCode::kKeysMissing:
      return 404;
    case ErrorCode::kDuplicateEntitlement:
    case ErrorCode::kAlreadyActivatedOnOtherDevice:
    case ErrorCode::kCloudAlreadyBound:
      return 409;
    default:
      return 500;
  }
}

ProviderService::ProviderService(LicenseAuthority& authority, std::optional<Key256> channel_key,
                                 RandomSource& rng)
    : authority_(authority), channel_key_(channel_key), rng_(rng) {}

std::string ProviderService::seal(std::string_view path, std::string_view plaintext) {
  std::lock_guard guard(rng_mutex_);
  return seal_envelope(*channel_key_, response_aad(path), plaintext, rng_);
}

HttpResponse ProviderService::handle(std::string_view method, std::string_view path, std::string_view body) {
  if (path == "/v1/health") {
    if (method != "GET") return {405, error_body(ErrorCode::kValidationError, "use GET")};
    return {200, json{{"status", "ok"}, {"envelope", envelope_enabled()}}.dump()};
  }
  if (path != "/v1/activate/smartphone" && path != "/v1/activate/cloud" && path != "/v1/entitlements") {
    return {404, error_body(ErrorCode::kNotFound, "no such endpoint")};
  }
  if (method != "POST") return {405, error_body(ErrorCode::kValidationError, "use POST")};

  std::string plaintext;
  if (channel_key_) {
    try {
      plaintext = open_envelope(*channel_key_, path, body);
    } catch (const Error& e) {
      // The peer may not share our key, so this one goes back in the clear.
      return {http_status_for(e.code()), error_body(e.code(), e.what())};
    }
  } else {
    plaintext = std::string(body);
  }

  HttpResponse response;
  try {
    response.body = dispatch(path, plaintext);
  } catch (const Error& e) {
    response = {http_status_for(e.code()), error_body(e.code(), e.what())};
  } catch (const std::exception& e) {
    response = {500, error_body(ErrorCode::kInternalError, e.what())};
  }
  if (channel_key_) response.body = seal(path, response.body);
  return response;
}

std::string ProviderService::dispatch(std::string_view path, std::string_view body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_object()) throw Error(ErrorCode::kValidationError, "request body must be a JSON object");

  if (path == "/v1/activate/smartphone") {
    return json{{"sas", authority_.activate_smartphone(required_string(doc, "sars"))}}.dump();
  }
  if (path == "/v1/activate/cloud") {
    return json{{"cas", authority_.activate_cloud(required_string(doc, "cars"))}}.dump();
  }
  Entitlement e;
  try {
    e.app_id = ApplicationId::from_hex(required_string(doc, "app_id"));
    e.purchase_token = PurchaseToken::from_hex(required_string(doc, "purchase_token"));
  } catch (const Error& err) {
    throw Error(ErrorCode::kValidationError, err.what());
  }
  e.license_type = license_type_field(doc);
  authority_.register_entitlement(e);
  return json{{"status", "ok"}}.dump();
}

}  // namespace pirax
