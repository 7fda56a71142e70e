#include "pirax/identity.hpp"

#include <algorithm>
#include <cctype>

#include "pirax/error.hpp"

namespace pirax {
namespace {

bool all_digits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Luhn digit sum; every second digit from the right is doubled, starting
// with the rightmost one when `double_rightmost` is set.
int luhn_sum(std::string_view digits, bool double_rightmost) {
  int sum = 0;
  bool dbl = double_rightmost;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    int d = *it - '0';
    if (dbl) {
      d *= 2;
      if (d > 9) d -= 9;
    }
    sum += d;
    dbl = !dbl;
  }
  return sum;
}

}  // namespace

char luhn_check_digit(std::string_view digits14) {
  if (digits14.size() != 14 || !all_digits(digits14)) {
    throw Error(ErrorCode::kImeiMalformed, "IMEI body must be 14 decimal digits");
  }
  int sum = luhn_sum(digits14, /*double_rightmost=*/true);
  return static_cast<char>('0' + (10 - sum % 10) % 10);
}

DeviceIdentity parse_imei(std::string_view text) {
  if (text.size() != 15 || !all_digits(text)) {
    throw Error(ErrorCode::kImeiMalformed, "IMEI must be 15 decimal digits");
  }
  if (luhn_check_digit(text.substr(0, 14)) != text[14]) {
    throw Error(ErrorCode::kImeiChecksumFailed, "IMEI check digit mismatch");
  }
  return DeviceIdentity(std::string(text));
}

VmIdentity parse_uuid(std::string_view text) {
  static constexpr std::size_t kDashes[] = {8, 13, 18, 23};
  if (text.size() != 36) throw Error(ErrorCode::kUuidMalformed, "UUID must be 36 characters");
  std::string hex;
  hex.reserve(32);
  for (std::size_t i = 0; i < text.size(); ++i) {
    bool dash_slot = std::find(std::begin(kDashes), std::end(kDashes), i) != std::end(kDashes);
    if (dash_slot) {
      if (text[i] != '-') throw Error(ErrorCode::kUuidMalformed, "UUID grouping must be 8-4-4-4-12");
      continue;
    }
    if (!std::isxdigit(static_cast<unsigned char>(text[i]))) {
      throw Error(ErrorCode::kUuidMalformed, "UUID contains a non-hex character");
    }
    hex.push_back(text[i]);
  }
  ByteArray<16> bytes = fixed_from_hex<16>(hex);
  return vm_identity_from_bytes(bytes);
}

VmIdentity vm_identity_from_bytes(const ByteArray<16>& bytes) {
  if (std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; })) {
    throw Error(ErrorCode::kUuidNil, "nil UUID is not a VM identity");
  }
  return VmIdentity(bytes);
}

std::string VmIdentity::to_string() const {
  std::string hex = to_hex(bytes_);
  return hex.substr(0, 8) + '-' + hex.substr(8, 4) + '-' + hex.substr(12, 4) + '-' +
         hex.substr(16, 4) + '-' + hex.substr(20, 12);
}

LicenseType license_type_from_byte(std::uint8_t b) {
  switch (b) {
    case 0x01:
      return LicenseType::kSmartphoneOnly;
    case 0x02:
      return LicenseType::kSmartphoneAndCloud;
    default:
      throw Error(ErrorCode::kValidationError, "unknown license type byte " + std::to_string(b));
  }
}

std::string_view to_string(LicenseType t) {
  return t == LicenseType::kSmartphoneOnly ? "SmartphoneOnly" : "SmartphoneAndCloud";
}

LicenseType parse_license_type(std::string_view text) {
  if (text == "SmartphoneOnly" || text == "phone") return LicenseType::kSmartphoneOnly;
  if (text == "SmartphoneAndCloud" || text == "phone+cloud") return LicenseType::kSmartphoneAndCloud;
  throw Error(ErrorCode::kValidationError, "unknown license type '" + std::string(text) + "'");
}

}  // namespace pirax
