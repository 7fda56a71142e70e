#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pirax {

// Stable error codes. The string form is part of the wire protocol
// (error response bodies and scenario expectations).
enum class ErrorCode {
  kImeiMalformed,
  kImeiChecksumFailed,
  kUuidMalformed,
  kUuidNil,
  kHexMalformed,
  kArmorMalformed,
  kSerialMalformed,
  kUnsupportedVersion,
  kTokenMacMismatch,
  kAppIdMismatch,
  kDeviceMismatch,
  kVmMismatch,
  kSasMismatch,
  kLicenseTypeInsufficient,
  kEntitlementNotFound,
  kDuplicateEntitlement,
  kAlreadyActivatedOnOtherDevice,
  kUnknownSas,
  kCloudAlreadyBound,
  kValidationError,
  kLedgerCorrupt,
  kStateCorrupt,
  kAlreadyActivated,
  kSasRejectedLocally,
  kCasRejectedLocally,
  kSasMissingOnClone,
  kEnvelopeRejected,
  kKeysMissing,
  kTransportError,
  kNotFound,
  kScenarioMalformed,
  kInternalError,
};

std::string_view to_string(ErrorCode code);

// Returns false for names that are not a known code.
bool parse_error_code(std::string_view name, ErrorCode* out);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  explicit Error(ErrorCode code)
      : std::runtime_error(std::string(to_string(code))), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pirax
