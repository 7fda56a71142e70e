#include "pirax/authority.hpp"

#include <chrono>

namespace pirax {

std::uint64_t system_clock_seconds() {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch())
          .count());
}

LicenseAuthority::LicenseAuthority(KeyRing keys, Ledger ledger, Clock clock)
    : keys_(std::move(keys)), ledger_(std::move(ledger)), clock_(std::move(clock)) {}

std::mutex& LicenseAuthority::lock_for(const LicenseKey& key) {
  std::lock_guard guard(locks_mutex_);
  auto& slot = key_locks_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

const KeyMaterial& LicenseAuthority::keys_for(const ApplicationId& app) const {
  const KeyMaterial* keys = keys_.find(app);
  if (keys == nullptr) {
    throw Error(ErrorCode::kEntitlementNotFound, "application " + app.to_hex() + " is not served here");
  }
  return *keys;
}

void LicenseAuthority::register_entitlement(const Entitlement& entitlement) {
  keys_.for_app(entitlement.app_id);
  LicenseKey key{entitlement.app_id, entitlement.purchase_token};
  std::lock_guard guard(lock_for(key));
  if (ledger_.find_entitlement(key)) {
    throw Error(ErrorCode::kDuplicateEntitlement, "purchase already registered");
  }
  ledger_.append(EntitlementEntry{entitlement, clock_()});
}

Sas LicenseAuthority::activate_smartphone(const Sars& sars) {
  const KeyMaterial& keys = keys_for(sars.app_id);
  if (!sars_mac_valid(sars, keys)) throw Error(ErrorCode::kTokenMacMismatch, "SARS MAC does not verify");
  DeviceIdentity dev = parse_imei(sars.imei);

  LicenseKey key{sars.app_id, sars.purchase_token};
  std::lock_guard guard(lock_for(key));
  auto entitlement = ledger_.find_entitlement(key);
  if (!entitlement) throw Error(ErrorCode::kEntitlementNotFound, "no entitlement for this purchase");

  if (auto existing = ledger_.find_record(key)) {
    if (existing->imei != dev.imei()) {
      throw Error(ErrorCode::kAlreadyActivatedOnOtherDevice, "purchase is bound to another device");
    }
    return Sas::parse(dearmor(existing->sas));
  }

  std::uint64_t now = clock_();
  Sas sas = issue_sas(sars, entitlement->entitlement, now, keys);
  LicenseRecord record;
  record.app_id = sars.app_id;
  record.purchase_token = sars.purchase_token;
  record.license_type = sas.license_type;
  record.imei = dev.imei();
  record.sas = armor(sas.to_bytes());
  record.created_at = now;
  record.updated_at = now;
  ledger_.append(record);
  return sas;
}

std::string LicenseAuthority::activate_smartphone(std::string_view armored_sars) {
  ++serial_requests_;
  return armor(activate_smartphone(Sars::parse(dearmor(armored_sars))).to_bytes());
}

Cas LicenseAuthority::activate_cloud(const Cars& cars) {
  const KeyMaterial& keys = keys_for(cars.app_id);
  if (!cars_mac_valid(cars, keys)) throw Error(ErrorCode::kTokenMacMismatch, "CARS MAC does not verify");
  if (!sas_content_valid(cars.sas, keys)) {
    throw Error(ErrorCode::kTokenMacMismatch, "embedded SAS does not verify");
  }
  VmIdentity vm = vm_identity_from_bytes(cars.uuid);
  const std::string armored_sas = armor(cars.sas.to_bytes());

  auto key = ledger_.find_by_sas(armored_sas);
  if (!key) throw Error(ErrorCode::kUnknownSas, "SAS was never issued by this authority");
  std::lock_guard guard(lock_for(*key));
  LicenseRecord record = ledger_.find_record(*key).value();

  if (record.license_type != LicenseType::kSmartphoneAndCloud) {
    throw Error(ErrorCode::kLicenseTypeInsufficient, "license does not cover cloud execution");
  }
  if (record.uuid) {
    if (*record.uuid != vm.to_string()) {
      throw Error(ErrorCode::kCloudAlreadyBound, "license is bound to another VM");
    }
    return Cas::parse(dearmor(record.cas.value()));
  }

  std::uint64_t now = clock_();
  Cas cas = issue_cas(cars, now, keys);
  record.cas = armor(cas.to_bytes());
  record.uuid = vm.to_string();
  record.updated_at = now;
  ledger_.append(record);
  return cas;
}

std::string LicenseAuthority::activate_cloud(std::string_view armored_cars) {
  ++serial_requests_;
  return armor(activate_cloud(Cars::parse(dearmor(armored_cars))).to_bytes());
}

}  // namespace pirax
