#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>

#include "pirax/keys.hpp"
#include "pirax/ledger.hpp"
#include "pirax/serial.hpp"

namespace pirax {

// Seconds since the Unix epoch.
using Clock = std::function<std::uint64_t()>;
std::uint64_t system_clock_seconds();

// The application provider's license authority. Issues SAS/CAS, keeps a copy
// of every issued serial in the ledger, and answers repeat requests from the
// same device or VM with the stored serial.
//
// Thread-safe. Mutations for one (app_id, purchase_token) are serialized;
// different purchases proceed in parallel.
class LicenseAuthority {
 public:
  LicenseAuthority(KeyRing keys, Ledger ledger, Clock clock = system_clock_seconds);

  // Throws kDuplicateEntitlement, kKeysMissing (no keys for the app).
  void register_entitlement(const Entitlement& entitlement);

  // Throws kEntitlementNotFound, kTokenMacMismatch, kAlreadyActivatedOnOtherDevice,
  // IMEI errors.
  Sas activate_smartphone(const Sars& sars);
  // Armored in, armored out. Adds kArmorMalformed / kSerialMalformed.
  std::string activate_smartphone(std::string_view armored_sars);

  // Throws kEntitlementNotFound, kTokenMacMismatch, kUnknownSas,
  // kLicenseTypeInsufficient, kCloudAlreadyBound, UUID errors.
  Cas activate_cloud(const Cars& cars);
  std::string activate_cloud(std::string_view armored_cars);

  const Ledger& ledger() const { return ledger_; }
  // Armored activation requests that reached serial decoding.
  std::uint64_t serial_requests() const { return serial_requests_.load(); }

 private:
  std::mutex& lock_for(const LicenseKey& key);
  const KeyMaterial& keys_for(const ApplicationId& app) const;

  KeyRing keys_;
  Ledger ledger_;
  Clock clock_;
  std::mutex locks_mutex_;
  std::map<LicenseKey, std::unique_ptr<std::mutex>> key_locks_;
  std::atomic<std::uint64_t> serial_requests_{0};
};

}  // namespace pirax
