#include "pirax/error.hpp"

#include <array>
#include <utility>

namespace pirax {
namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 32> kNames = {{
    {ErrorCode::kImeiMalformed, "ImeiMalformed"},
    {ErrorCode::kImeiChecksumFailed, "ImeiChecksumFailed"},
    {ErrorCode::kUuidMalformed, "UuidMalformed"},
    {ErrorCode::kUuidNil, "UuidNil"},
    {ErrorCode::kHexMalformed, "HexMalformed"},
    {ErrorCode::kArmorMalformed, "ArmorMalformed"},
    {ErrorCode::kSerialMalformed, "SerialMalformed"},
    {ErrorCode::kUnsupportedVersion, "UnsupportedVersion"},
    {ErrorCode::kTokenMacMismatch, "TokenMacMismatch"},
    {ErrorCode::kAppIdMismatch, "AppIdMismatch"},
    {ErrorCode::kDeviceMismatch, "DeviceMismatch"},
    {ErrorCode::kVmMismatch, "VmMismatch"},
    {ErrorCode::kSasMismatch, "SasMismatch"},
    {ErrorCode::kLicenseTypeInsufficient, "LicenseTypeInsufficient"},
    {ErrorCode::kEntitlementNotFound, "EntitlementNotFound"},
    {ErrorCode::kDuplicateEntitlement, "DuplicateEntitlement"},
    {ErrorCode::kAlreadyActivatedOnOtherDevice, "AlreadyActivatedOnOtherDevice"},
    {ErrorCode::kUnknownSas, "UnknownSas"},
    {ErrorCode::kCloudAlreadyBound, "CloudAlreadyBound"},
    {ErrorCode::kValidationError, "ValidationError"},
    {ErrorCode::kLedgerCorrupt, "LedgerCorrupt"},
    {ErrorCode::kStateCorrupt, "StateCorrupt"},
    {ErrorCode::kAlreadyActivated, "AlreadyActivated"},
    {ErrorCode::kSasRejectedLocally, "SasRejectedLocally"},
    {ErrorCode::kCasRejectedLocally, "CasRejectedLocally"},
    {ErrorCode::kSasMissingOnClone, "SasMissingOnClone"},
    {ErrorCode::kEnvelopeRejected, "EnvelopeRejected"},
    {ErrorCode::kKeysMissing, "KeysMissing"},
    {ErrorCode::kTransportError, "TransportError"},
    {ErrorCode::kNotFound, "NotFound"},
    {ErrorCode::kScenarioMalformed, "ScenarioMalformed"},
    {ErrorCode::kInternalError, "InternalError"},
}};

}  // namespace

std::string_view to_string(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "InternalError";
}

bool parse_error_code(std::string_view name, ErrorCode* out) {
  for (const auto& [c, n] : kNames) {
    if (n == name) {
      *out = c;
      return true;
    }
  }
  return false;
}

}  // namespace pirax
