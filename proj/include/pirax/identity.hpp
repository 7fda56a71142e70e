#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "pirax/bytes.hpp"

namespace pirax {

// A smartphone's IMEI: 15 ASCII digits whose last digit is the Luhn check
// digit over the first 14. Only constructible through parse_imei.
class DeviceIdentity {
 public:
  const std::string& imei() const { return imei_; }

  friend bool operator==(const DeviceIdentity&, const DeviceIdentity&) = default;
  friend DeviceIdentity parse_imei(std::string_view text);

 private:
  explicit DeviceIdentity(std::string imei) : imei_(std::move(imei)) {}
  std::string imei_;
};

// Cloud VM UUID, never nil.
class VmIdentity {
 public:
  const ByteArray<16>& bytes() const { return bytes_; }
  // Canonical lowercase 8-4-4-4-12 form.
  std::string to_string() const;

  friend bool operator==(const VmIdentity&, const VmIdentity&) = default;
  friend VmIdentity parse_uuid(std::string_view text);
  friend VmIdentity vm_identity_from_bytes(const ByteArray<16>& bytes);

 private:
  explicit VmIdentity(const ByteArray<16>& bytes) : bytes_(bytes) {}
  ByteArray<16> bytes_;
};

// Throws Error(kImeiMalformed) or Error(kImeiChecksumFailed).
DeviceIdentity parse_imei(std::string_view text);

// Throws Error(kUuidMalformed) or Error(kUuidNil).
VmIdentity parse_uuid(std::string_view text);
VmIdentity vm_identity_from_bytes(const ByteArray<16>& bytes);

// Luhn check digit ('0'..'9') completing a 14-digit IMEI body.
char luhn_check_digit(std::string_view digits14);

// 16-byte opaque identifiers, written as 32 lowercase hex digits.
template <typename Tag>
struct OpaqueId {
  ByteArray<16> bytes{};

  std::string to_hex() const { return pirax::to_hex(bytes); }
  static OpaqueId from_hex(std::string_view text) {
    return OpaqueId{fixed_from_hex<16>(text)};
  }

  friend auto operator<=>(const OpaqueId&, const OpaqueId&) = default;
};

using ApplicationId = OpaqueId<struct ApplicationIdTag>;
using PurchaseToken = OpaqueId<struct PurchaseTokenTag>;

enum class LicenseType : std::uint8_t {
  kSmartphoneOnly = 0x01,
  kSmartphoneAndCloud = 0x02,
};

inline std::uint8_t to_byte(LicenseType t) { return static_cast<std::uint8_t>(t); }
// Throws Error(kValidationError) for bytes other than 0x01 and 0x02.
LicenseType license_type_from_byte(std::uint8_t b);

// "SmartphoneOnly" / "SmartphoneAndCloud".
std::string_view to_string(LicenseType t);
// Accepts the names above and the CLI spellings "phone" / "phone+cloud".
LicenseType parse_license_type(std::string_view text);

struct Entitlement {
  ApplicationId app_id;
  LicenseType license_type = LicenseType::kSmartphoneOnly;
  PurchaseToken purchase_token;

  friend bool operator==(const Entitlement&, const Entitlement&) = default;
};

}  // namespace pirax
