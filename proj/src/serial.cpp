#include "pirax/serial.hpp"

#include <algorithm>
#include <string_view>

namespace pirax {
namespace {

constexpr std::string_view kSasBindLabel = "SAS-BIND";
constexpr std::string_view kCasBindLabel = "CAS-BIND";

void put_u64(Bytes& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_header(Bytes& out, SerialKind kind) {
  out.push_back(kSerialVersion);
  out.push_back(static_cast<std::uint8_t>(kind));
}

// Sequential reader over a serial whose total length was already checked.
class Reader {
 public:
  explicit Reader(ByteView bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return bytes_[pos_++]; }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  template <std::size_t N>
  ByteArray<N> fixed() {
    ByteArray<N> out{};
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), N, out.begin());
    pos_ += N;
    return out;
  }

  ByteView take(std::size_t n) {
    ByteView v = bytes_.subspan(pos_, n);
    pos_ += n;
    return v;
  }

 private:
  ByteView bytes_;
  std::size_t pos_ = 0;
};

Reader open_serial(ByteView bytes, SerialKind kind, std::size_t size, const char* name) {
  if (bytes.size() != size) {
    throw Error(ErrorCode::kSerialMalformed, std::string(name) + " must be " + std::to_string(size) +
                                                 " bytes, got " + std::to_string(bytes.size()));
  }
  Reader r(bytes);
  if (r.u8() != kSerialVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, std::string(name) + " has unsupported version");
  }
  if (r.u8() != static_cast<std::uint8_t>(kind)) {
    throw Error(ErrorCode::kSerialMalformed, std::string(name) + " has the wrong kind byte");
  }
  return r;
}

Bytes with_mac(Bytes body, const Mac256& mac) {
  append(body, mac);
  return body;
}

bool mac_matches(const Key256& key, const Bytes& body, const Mac256& mac) {
  return constant_time_equal(hmac_sha256(key, body), mac);
}

bool known_license_byte(LicenseType t) {
  return t == LicenseType::kSmartphoneOnly || t == LicenseType::kSmartphoneAndCloud;
}

}  // namespace

KeyMaterial KeyMaterial::make(const Key256& request_key, const Key256& issue_key) {
  if (constant_time_equal(request_key, issue_key)) {
    throw Error(ErrorCode::kValidationError, "request_key and issue_key must differ");
  }
  return KeyMaterial{request_key, issue_key};
}

KeyMaterial KeyMaterial::generate(RandomSource& rng) {
  for (;;) {
    Key256 request = rng.array<32>();
    Key256 issue = rng.array<32>();
    if (request != issue) return KeyMaterial{request, issue};
  }
}

// --- layouts ---------------------------------------------------------------

Bytes Sars::body() const {
  Bytes out;
  out.reserve(kSize);
  put_header(out, SerialKind::kSars);
  append(out, app_id.bytes);
  append(out, as_bytes(imei));
  append(out, purchase_token.bytes);
  append(out, nonce);
  return out;
}

Bytes Sars::to_bytes() const { return with_mac(body(), mac); }

Sars Sars::parse(ByteView bytes) {
  Reader r = open_serial(bytes, SerialKind::kSars, kSize, "SARS");
  Sars s;
  s.app_id.bytes = r.fixed<16>();
  ByteView imei = r.take(15);
  s.imei.assign(imei.begin(), imei.end());
  s.purchase_token.bytes = r.fixed<16>();
  s.nonce = r.fixed<16>();
  s.mac = r.fixed<32>();
  return s;
}

Bytes Sas::body() const {
  Bytes out;
  out.reserve(kSize);
  put_header(out, SerialKind::kSas);
  append(out, app_id.bytes);
  out.push_back(to_byte(license_type));
  put_u64(out, issued_at);
  append(out, device_binding);
  return out;
}

Bytes Sas::to_bytes() const { return with_mac(body(), mac); }

Sas Sas::parse(ByteView bytes) {
  Reader r = open_serial(bytes, SerialKind::kSas, kSize, "SAS");
  Sas s;
  s.app_id.bytes = r.fixed<16>();
  s.license_type = static_cast<LicenseType>(r.u8());
  s.issued_at = r.u64();
  s.device_binding = r.fixed<32>();
  s.mac = r.fixed<32>();
  return s;
}

Bytes Cars::body() const {
  Bytes out;
  out.reserve(kSize);
  put_header(out, SerialKind::kCars);
  append(out, app_id.bytes);
  append(out, uuid);
  append(out, sas.to_bytes());
  append(out, nonce);
  return out;
}

Bytes Cars::to_bytes() const { return with_mac(body(), mac); }

Cars Cars::parse(ByteView bytes) {
  Reader r = open_serial(bytes, SerialKind::kCars, kSize, "CARS");
  Cars c;
  c.app_id.bytes = r.fixed<16>();
  c.uuid = r.fixed<16>();
  c.sas = Sas::parse(r.take(Sas::kSize));
  c.nonce = r.fixed<16>();
  c.mac = r.fixed<32>();
  return c;
}

Bytes Cas::body() const {
  Bytes out;
  out.reserve(kSize);
  put_header(out, SerialKind::kCas);
  append(out, app_id.bytes);
  out.push_back(to_byte(license_type));
  put_u64(out, issued_at);
  append(out, vm_binding);
  return out;
}

Bytes Cas::to_bytes() const { return with_mac(body(), mac); }

Cas Cas::parse(ByteView bytes) {
  Reader r = open_serial(bytes, SerialKind::kCas, kSize, "CAS");
  Cas c;
  c.app_id.bytes = r.fixed<16>();
  c.license_type = static_cast<LicenseType>(r.u8());
  c.issued_at = r.u64();
  c.vm_binding = r.fixed<32>();
  c.mac = r.fixed<32>();
  return c;
}

std::string ValidationOutcome::to_string() const {
  if (is_valid()) return "Valid(" + std::string(pirax::to_string(license_type_)) + ")";
  return "Invalid(" + std::string(pirax::to_string(reason())) + ")";
}

// --- bindings --------------------------------------------------------------

Mac256 device_binding(const Key256& issue_key, const ApplicationId& app, const DeviceIdentity& dev,
                      LicenseType type) {
  Bytes msg;
  append(msg, as_bytes(kSasBindLabel));
  append(msg, app.bytes);
  append(msg, as_bytes(dev.imei()));
  msg.push_back(to_byte(type));
  return hmac_sha256(issue_key, msg);
}

Mac256 vm_binding(const Key256& issue_key, const ApplicationId& app, const VmIdentity& vm,
                  const Mac256& device_binding, LicenseType type) {
  Bytes msg;
  append(msg, as_bytes(kCasBindLabel));
  append(msg, app.bytes);
  append(msg, vm.bytes());
  append(msg, device_binding);
  msg.push_back(to_byte(type));
  return hmac_sha256(issue_key, msg);
}

// --- smartphone license ----------------------------------------------------

Sars encode_sars(const DeviceIdentity& dev, const ApplicationId& app, const PurchaseToken& purchase,
                 const Nonce& nonce, const KeyMaterial& keys) {
  Sars s;
  s.app_id = app;
  s.imei = dev.imei();
  s.purchase_token = purchase;
  s.nonce = nonce;
  s.mac = hmac_sha256(keys.request_key, s.body());
  return s;
}

bool sars_mac_valid(const Sars& sars, const KeyMaterial& keys) {
  return mac_matches(keys.request_key, sars.body(), sars.mac);
}

bool cars_mac_valid(const Cars& cars, const KeyMaterial& keys) {
  return mac_matches(keys.request_key, cars.body(), cars.mac);
}

Sas issue_sas(const Sars& sars, const Entitlement& entitlement, std::uint64_t now,
              const KeyMaterial& keys) {
  if (!mac_matches(keys.request_key, sars.body(), sars.mac)) {
    throw Error(ErrorCode::kTokenMacMismatch, "SARS MAC does not verify");
  }
  if (sars.app_id != entitlement.app_id) {
    throw Error(ErrorCode::kAppIdMismatch, "SARS is for a different application");
  }
  if (sars.purchase_token != entitlement.purchase_token) {
    throw Error(ErrorCode::kEntitlementNotFound, "SARS purchase token does not match entitlement");
  }
  DeviceIdentity dev = parse_imei(sars.imei);

  Sas sas;
  sas.app_id = entitlement.app_id;
  sas.license_type = entitlement.license_type;
  sas.issued_at = now;
  sas.device_binding = device_binding(keys.issue_key, sas.app_id, dev, sas.license_type);
  sas.mac = hmac_sha256(keys.issue_key, sas.body());
  return sas;
}

bool sas_content_valid(const Sas& sas, const KeyMaterial& keys) {
  return mac_matches(keys.issue_key, sas.body(), sas.mac) && known_license_byte(sas.license_type);
}

ValidationOutcome verify_sas(const Sas& sas, const DeviceIdentity& dev, const KeyMaterial& keys) {
  if (!sas_content_valid(sas, keys)) return ValidationOutcome::invalid(ErrorCode::kTokenMacMismatch);
  Mac256 expected = device_binding(keys.issue_key, sas.app_id, dev, sas.license_type);
  if (!constant_time_equal(expected, sas.device_binding)) {
    return ValidationOutcome::invalid(ErrorCode::kDeviceMismatch);
  }
  return ValidationOutcome::valid(sas.license_type);
}

ValidationOutcome verify_sas(ByteView sas_bytes, const DeviceIdentity& dev, const KeyMaterial& keys) {
  try {
    return verify_sas(Sas::parse(sas_bytes), dev, keys);
  } catch (const Error& e) {
    return ValidationOutcome::invalid(e.code());
  }
}

// --- cloud license ---------------------------------------------------------

Cars encode_cars(const VmIdentity& vm, const Sas& sas, const ApplicationId& app, const Nonce& nonce,
                 const KeyMaterial& keys) {
  if (!sas_content_valid(sas, keys)) {
    throw Error(ErrorCode::kTokenMacMismatch, "SAS does not verify; refusing to request cloud activation");
  }
  if (sas.app_id != app) throw Error(ErrorCode::kAppIdMismatch, "SAS is for a different application");
  Cars c;
  c.app_id = app;
  c.uuid = vm.bytes();
  c.sas = sas;
  c.nonce = nonce;
  c.mac = hmac_sha256(keys.request_key, c.body());
  return c;
}

Cas issue_cas(const Cars& cars, std::uint64_t now, const KeyMaterial& keys) {
  if (!mac_matches(keys.request_key, cars.body(), cars.mac)) {
    throw Error(ErrorCode::kTokenMacMismatch, "CARS MAC does not verify");
  }
  if (!sas_content_valid(cars.sas, keys)) {
    throw Error(ErrorCode::kTokenMacMismatch, "embedded SAS does not verify");
  }
  if (cars.sas.app_id != cars.app_id) {
    throw Error(ErrorCode::kAppIdMismatch, "embedded SAS is for a different application");
  }
  if (cars.sas.license_type != LicenseType::kSmartphoneAndCloud) {
    throw Error(ErrorCode::kLicenseTypeInsufficient, "license does not cover cloud execution");
  }
  VmIdentity vm = vm_identity_from_bytes(cars.uuid);

  Cas cas;
  cas.app_id = cars.app_id;
  cas.license_type = cars.sas.license_type;
  cas.issued_at = now;
  cas.vm_binding = vm_binding(keys.issue_key, cas.app_id, vm, cars.sas.device_binding, cas.license_type);
  cas.mac = hmac_sha256(keys.issue_key, cas.body());
  return cas;
}

ValidationOutcome verify_cas(const Cas& cas, const VmIdentity& vm, const Sas& sas,
                             const KeyMaterial& keys) {
  if (!mac_matches(keys.issue_key, cas.body(), cas.mac) || !known_license_byte(cas.license_type)) {
    return ValidationOutcome::invalid(ErrorCode::kTokenMacMismatch);
  }
  if (!sas_content_valid(sas, keys) || sas.app_id != cas.app_id ||
      sas.license_type != cas.license_type) {
    return ValidationOutcome::invalid(ErrorCode::kSasMismatch);
  }
  Mac256 expected = vm_binding(keys.issue_key, cas.app_id, vm, sas.device_binding, cas.license_type);
  if (!constant_time_equal(expected, cas.vm_binding)) {
    return ValidationOutcome::invalid(ErrorCode::kVmMismatch);
  }
  return ValidationOutcome::valid(cas.license_type);
}

ValidationOutcome verify_cas(ByteView cas_bytes, const VmIdentity& vm, ByteView sas_bytes,
                             const KeyMaterial& keys) {
  Cas cas;
  try {
    cas = Cas::parse(cas_bytes);
  } catch (const Error& e) {
    return ValidationOutcome::invalid(e.code());
  }
  Sas sas;
  try {
    sas = Sas::parse(sas_bytes);
  } catch (const Error&) {
    return ValidationOutcome::invalid(ErrorCode::kSasMismatch);
  }
  return verify_cas(cas, vm, sas, keys);
}

}  // namespace pirax
