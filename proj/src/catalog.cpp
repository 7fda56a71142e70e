#include <algorithm>

#include "pirax/error.hpp"
#include "pirax/scenario.hpp"

namespace pirax {
namespace {

constexpr const char* kCatalog[] = {
    R"json({
  "name": "legit-device-and-cloud",
  "description": "Nominal smartphone then cloud activation; both gates allow.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "reinstall-same-device",
  "description": "Reinstalling on the same phone and clone yields the stored serials byte for byte.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud", "expect": "DuplicateEntitlement"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "snapshot", "state": "app", "field": "sas", "as": "first-sas"},
    {"op": "delete_state", "state": "app"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Deny(NotActivated)"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "compare_snapshot", "state": "app", "field": "sas", "as": "first-sas", "expect": "same"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "snapshot", "state": "clone", "field": "cas", "as": "first-cas"},
    {"op": "delete_state", "state": "clone"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "compare_snapshot", "state": "clone", "field": "cas", "as": "first-cas", "expect": "same"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "vm-restart-migrate",
  "description": "The VM UUID survives restart, migration and upgrade, so the clone keeps running.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "snapshot", "state": "clone", "field": "cas", "as": "cas"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"},
    {"op": "restart_vm", "vm": "vm1", "state": "clone", "event": "restart"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"},
    {"op": "restart_vm", "vm": "vm1", "state": "clone", "event": "migrate"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"},
    {"op": "restart_vm", "vm": "vm1", "state": "clone", "event": "upgrade"},
    {"op": "delete_state", "state": "clone"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "compare_snapshot", "state": "clone", "field": "cas", "as": "cas", "expect": "same"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "clone-to-foreign-vm",
  "description": "A copied clone image on another VM is refused locally and by the authority.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "copy_state", "from": "clone", "to": "stolen"},
    {"op": "clone_gate", "vm": "attacker-vm", "state": "stolen", "expect": "Deny(VmMismatch)"},
    {"op": "clone_activate", "vm": "attacker-vm", "state": "stolen", "expect": "CloudAlreadyBound"},
    {"op": "clone_gate", "vm": "attacker-vm", "state": "stolen", "expect": "Deny(VmMismatch)"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "clone-to-same-model-phone",
  "description": "The clone's files installed on another phone of the same model do not run.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "copy_state", "from": "clone", "to": "pirated"},
    {"op": "device_gate", "device": "same-model-phone", "state": "pirated", "expect": "Deny(DeviceMismatch)"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "app-extracted-no-license",
  "description": "An application extracted with its dependencies but no activation state is refused everywhere.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "device_gate", "device": "other-phone", "state": "extracted", "expect": "Deny(NotActivated)"},
    {"op": "clone_gate", "vm": "other-vm", "state": "extracted", "expect": "Deny(SasMissingOnClone)"},
    {"op": "clone_activate", "vm": "other-vm", "state": "extracted", "expect": "SasMissingOnClone"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "tampered-serial",
  "description": "Bit flips in stored or requested serials never pass a MAC check.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone"},
    {"op": "copy_state", "from": "app", "to": "app-tampered"},
    {"op": "tamper", "state": "app-tampered", "field": "sas", "bits": 1},
    {"op": "device_gate", "device": "phone", "state": "app-tampered", "expect": "Deny(TokenMacMismatch)"},
    {"op": "copy_state", "from": "clone", "to": "clone-cas-tampered"},
    {"op": "tamper", "state": "clone-cas-tampered", "field": "cas", "bits": 1},
    {"op": "clone_gate", "vm": "vm1", "state": "clone-cas-tampered", "expect": "Deny(TokenMacMismatch)"},
    {"op": "copy_state", "from": "clone", "to": "clone-sas-tampered"},
    {"op": "tamper", "state": "clone-sas-tampered", "field": "sas", "bits": 3},
    {"op": "clone_gate", "vm": "vm1", "state": "clone-sas-tampered", "expect": "Deny(TokenMacMismatch)"},
    {"op": "tamper_sars", "device": "phone", "purchase": "p1", "expect": "TokenMacMismatch"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "smartphone-only-cloud-attempt",
  "description": "A smartphone-only license runs on the phone but cannot be extended to the cloud.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone"},
    {"op": "entitle", "purchase": "p2", "license_type": "phone+satellite", "expect": "ValidationError"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"},
    {"op": "copy_state", "from": "app", "to": "clone"},
    {"op": "clone_activate", "vm": "vm1", "state": "clone", "expect": "LicenseTypeInsufficient"},
    {"op": "clone_gate", "vm": "vm1", "state": "clone", "expect": "Deny(NotActivated)"}
  ]
})json",
    R"json({
  "name": "second-device-same-purchase",
  "description": "One purchase binds one phone; a second phone and an unknown purchase are refused.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "device_activate", "device": "second-phone", "state": "second-app", "purchase": "p1",
     "expect": "AlreadyActivatedOnOtherDevice"},
    {"op": "device_gate", "device": "second-phone", "state": "second-app", "expect": "Deny(NotActivated)"},
    {"op": "device_activate", "device": "second-phone", "state": "second-app", "purchase": "never-bought",
     "expect": "EntitlementNotFound"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"}
  ]
})json",
    R"json({
  "name": "forged-sas-known-imei",
  "description": "Knowing an IMEI is not enough to mint a license for it.",
  "steps": [
    {"op": "entitle", "purchase": "p1", "license_type": "phone+cloud"},
    {"op": "device_activate", "device": "phone", "state": "app", "purchase": "p1"},
    {"op": "forge_sas", "device": "attacker-phone", "trials": 1000, "expect": "Deny(TokenMacMismatch)"},
    {"op": "forge_sas", "device": "phone", "trials": 1000, "expect": "Deny(TokenMacMismatch)"},
    {"op": "rogue_cars", "vm": "attacker-vm", "device": "attacker-phone", "expect": "UnknownSas"},
    {"op": "device_gate", "device": "phone", "state": "app", "expect": "Allow"}
  ]
})json",
};

}  // namespace

const std::vector<Scenario>& builtin_catalog() {
  static const std::vector<Scenario> catalog = [] {
    std::vector<Scenario> out;
    for (const char* text : kCatalog) out.push_back(Scenario::from_json(text));
    return out;
  }();
  return catalog;
}

const Scenario& builtin_scenario(std::string_view name) {
  const auto& catalog = builtin_catalog();
  auto it = std::find_if(catalog.begin(), catalog.end(), [&](const Scenario& s) { return s.name == name; });
  if (it == catalog.end()) throw Error(ErrorCode::kScenarioMalformed, "unknown scenario '" + std::string(name) + "'");
  return *it;
}

}  // namespace pirax
