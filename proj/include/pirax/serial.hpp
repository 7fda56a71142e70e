#pragma once

// Wire formats of the four activation serials and the two keyed encoding
// schemes behind them.
//
//   Sars  request serial, device -> authority, MAC under request_key
//   Sas   device license, authority -> device, MAC under issue_key
//   Cars  request serial, clone -> authority, MAC under request_key
//   Cas   cloud license, authority -> clone, MAC under issue_key
//
// All layouts are fixed width with a leading version byte (0x01) and kind
// byte. Integers are big-endian. Every MAC is HMAC-SHA-256 over all bytes
// preceding it.

#include <cstdint>
#include <optional>
#include <string>

#include "pirax/crypto.hpp"
#include "pirax/error.hpp"
#include "pirax/identity.hpp"

namespace pirax {

inline constexpr std::uint8_t kSerialVersion = 0x01;

enum class SerialKind : std::uint8_t {
  kSars = 0x01,
  kSas = 0x02,
  kCars = 0x03,
  kCas = 0x04,
};

using Nonce = ByteArray<16>;

struct KeyMaterial {
  Key256 request_key{};
  Key256 issue_key{};

  // Throws Error(kValidationError) if the two keys are equal.
  static KeyMaterial make(const Key256& request_key, const Key256& issue_key);
  static KeyMaterial generate(RandomSource& rng);

  friend bool operator==(const KeyMaterial&, const KeyMaterial&) = default;
};

struct Sars {
  static constexpr std::size_t kSize = 97;

  ApplicationId app_id;
  std::string imei;  // 15 ASCII digits
  PurchaseToken purchase_token;
  Nonce nonce{};
  Mac256 mac{};

  Bytes body() const;
  Bytes to_bytes() const;
  // Structural parse. Throws kSerialMalformed, kUnsupportedVersion.
  static Sars parse(ByteView bytes);

  friend bool operator==(const Sars&, const Sars&) = default;
};

struct Sas {
  static constexpr std::size_t kSize = 91;

  ApplicationId app_id;
  LicenseType license_type = LicenseType::kSmartphoneOnly;  // unchecked until the MAC verifies
  std::uint64_t issued_at = 0;
  Mac256 device_binding{};
  Mac256 mac{};

  Bytes body() const;
  Bytes to_bytes() const;
  static Sas parse(ByteView bytes);

  friend bool operator==(const Sas&, const Sas&) = default;
};

struct Cars {
  static constexpr std::size_t kSize = 2 + 16 + 16 + Sas::kSize + 16 + 32;

  ApplicationId app_id;
  ByteArray<16> uuid{};
  Sas sas;
  Nonce nonce{};
  Mac256 mac{};

  Bytes body() const;
  Bytes to_bytes() const;
  static Cars parse(ByteView bytes);

  friend bool operator==(const Cars&, const Cars&) = default;
};

struct Cas {
  static constexpr std::size_t kSize = 91;

  ApplicationId app_id;
  LicenseType license_type = LicenseType::kSmartphoneAndCloud;
  std::uint64_t issued_at = 0;
  Mac256 vm_binding{};
  Mac256 mac{};

  Bytes body() const;
  Bytes to_bytes() const;
  static Cas parse(ByteView bytes);

  friend bool operator==(const Cas&, const Cas&) = default;
};

// Result of checking a license serial against an identity. Never thrown.
class ValidationOutcome {
 public:
  static ValidationOutcome valid(LicenseType t) { return ValidationOutcome(t, std::nullopt); }
  static ValidationOutcome invalid(ErrorCode reason) {
    return ValidationOutcome(LicenseType::kSmartphoneOnly, reason);
  }

  bool is_valid() const { return !reason_.has_value(); }
  // Only meaningful when is_valid().
  LicenseType license_type() const { return license_type_; }
  // Only meaningful when !is_valid().
  ErrorCode reason() const { return reason_.value_or(ErrorCode::kInternalError); }

  // "Valid(SmartphoneAndCloud)" or "Invalid(DeviceMismatch)".
  std::string to_string() const;

 private:
  ValidationOutcome(LicenseType t, std::optional<ErrorCode> reason)
      : license_type_(t), reason_(reason) {}
  LicenseType license_type_;
  std::optional<ErrorCode> reason_;
};

// Binding commitments.
Mac256 device_binding(const Key256& issue_key, const ApplicationId& app, const DeviceIdentity& dev,
                      LicenseType type);
Mac256 vm_binding(const Key256& issue_key, const ApplicationId& app, const VmIdentity& vm,
                  const Mac256& device_binding, LicenseType type);

// Device side: build the activation request.
Sars encode_sars(const DeviceIdentity& dev, const ApplicationId& app, const PurchaseToken& purchase,
                 const Nonce& nonce, const KeyMaterial& keys);

bool sars_mac_valid(const Sars& sars, const KeyMaterial& keys);
bool cars_mac_valid(const Cars& cars, const KeyMaterial& keys);

// Authority side. Throws kTokenMacMismatch, kAppIdMismatch, kEntitlementNotFound
// (purchase token differs), or IMEI errors if the request carries a bad IMEI.
Sas issue_sas(const Sars& sars, const Entitlement& entitlement, std::uint64_t now,
              const KeyMaterial& keys);

// True iff the Sas MAC verifies and its fields are well formed. This is the
// only check a clone can do, since it has no IMEI.
bool sas_content_valid(const Sas& sas, const KeyMaterial& keys);

ValidationOutcome verify_sas(const Sas& sas, const DeviceIdentity& dev, const KeyMaterial& keys);
// Parses first; structural failures become Invalid outcomes.
ValidationOutcome verify_sas(ByteView sas_bytes, const DeviceIdentity& dev, const KeyMaterial& keys);

// Clone side. Throws kTokenMacMismatch if `sas` does not verify and
// kAppIdMismatch if it belongs to another application.
Cars encode_cars(const VmIdentity& vm, const Sas& sas, const ApplicationId& app, const Nonce& nonce,
                 const KeyMaterial& keys);

// Authority side. Throws kTokenMacMismatch, kLicenseTypeInsufficient, kUuidNil.
Cas issue_cas(const Cars& cars, std::uint64_t now, const KeyMaterial& keys);

// Valid iff the Cas MAC verifies and its vm_binding matches (vm, sas).
// A Sas that is not a genuine license for the same application and type is
// reported as SasMismatch; any other binding failure as VmMismatch.
ValidationOutcome verify_cas(const Cas& cas, const VmIdentity& vm, const Sas& sas,
                             const KeyMaterial& keys);
ValidationOutcome verify_cas(ByteView cas_bytes, const VmIdentity& vm, ByteView sas_bytes,
                             const KeyMaterial& keys);

}  // namespace pirax
