#include "pirax/agent.hpp"

#include <unistd.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pirax {
namespace {

using nlohmann::json;

std::optional<Bytes> try_dearmor(const std::string& text) {
  try {
    return dearmor(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<std::string> optional_string(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace

std::string ActivationState::to_json() const {
  json doc{{"app_id", app_id.to_hex()}, {"sas", nullptr}, {"cas", nullptr}, {"activated_at", nullptr}};
  if (sas) doc["sas"] = *sas;
  if (cas) doc["cas"] = *cas;
  if (activated_at) doc["activated_at"] = *activated_at;
  return doc.dump(2);
}

ActivationState ActivationState::from_json(std::string_view text) {
  try {
    json doc = json::parse(text);
    ActivationState s;
    s.app_id = ApplicationId::from_hex(doc.at("app_id").get<std::string>());
    s.sas = optional_string(doc, "sas");
    s.cas = optional_string(doc, "cas");
    if (doc.contains("activated_at") && !doc["activated_at"].is_null()) {
      s.activated_at = doc["activated_at"].get<std::uint64_t>();
    }
    if (s.cas && !s.sas) throw Error(ErrorCode::kStateCorrupt, "cas without sas");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kStateCorrupt, std::string("activation state: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kStateCorrupt, std::string("activation state: ") + e.what());
  }
}

ActivationState state_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) return ActivationState{};
    throw Error(ErrorCode::kStateCorrupt, "cannot read " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return ActivationState::from_json(buf.str());
}

void state_store(const std::filesystem::path& path, const ActivationState& state) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << state.to_json() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::kInternalError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::kInternalError, "cannot replace " + path.string() + ": " + ec.message());
  }
}

std::string_view to_string(DenyReason reason) {
  switch (reason) {
    case DenyReason::kNotActivated:
      return "NotActivated";
    case DenyReason::kDeviceMismatch:
      return "DeviceMismatch";
    case DenyReason::kVmMismatch:
      return "VmMismatch";
    case DenyReason::kTokenMacMismatch:
      return "TokenMacMismatch";
    case DenyReason::kSasMissingOnClone:
      return "SasMissingOnClone";
  }
  return "NotActivated";
}

std::string GateVerdict::to_string() const {
  if (allowed()) return "Allow";
  return "Deny(" + std::string(pirax::to_string(reason())) + ")";
}

ActivationState device_first_run(const DeviceIdentity& dev, const ApplicationId& app,
                                 const PurchaseToken& purchase, AuthorityClient& authority,
                                 const KeyMaterial& keys, StateStore& store, RandomSource& rng,
                                 const Clock& clock) {
  auto guard = store.lock();
  if (store.load().activated()) throw Error(ErrorCode::kAlreadyActivated, "application already activated");

  Sars sars = encode_sars(dev, app, purchase, rng.array<16>(), keys);
  std::string armored_sas = authority.activate_smartphone(armor(sars.to_bytes()));

  auto raw = try_dearmor(armored_sas);
  ValidationOutcome outcome = raw ? verify_sas(*raw, dev, keys)
                                  : ValidationOutcome::invalid(ErrorCode::kArmorMalformed);
  if (!outcome.is_valid()) {
    throw Error(ErrorCode::kSasRejectedLocally, "authority returned a SAS that does not match this device (" +
                                                    outcome.to_string() + ")");
  }
  if (Sas::parse(*raw).app_id != app) {
    throw Error(ErrorCode::kSasRejectedLocally, "authority returned a SAS for another application");
  }

  ActivationState state;
  state.app_id = app;
  state.sas = armored_sas;
  state.activated_at = clock();
  store.store(state);
  return state;
}

GateVerdict device_gate(const DeviceIdentity& dev, const ActivationState& state, const KeyMaterial& keys) {
  if (!state.sas) return GateVerdict::deny(DenyReason::kNotActivated);
  auto raw = try_dearmor(*state.sas);
  if (!raw) return GateVerdict::deny(DenyReason::kTokenMacMismatch);
  ValidationOutcome outcome = verify_sas(*raw, dev, keys);
  if (outcome.is_valid()) return GateVerdict::allow();
  if (outcome.reason() == ErrorCode::kDeviceMismatch) return GateVerdict::deny(DenyReason::kDeviceMismatch);
  return GateVerdict::deny(DenyReason::kTokenMacMismatch);
}

ActivationState clone_activate(const VmIdentity& vm, AuthorityClient& authority, const KeyMaterial& keys,
                               StateStore& store, RandomSource& rng) {
  auto guard = store.lock();
  ActivationState state = store.load();
  if (!state.sas) throw Error(ErrorCode::kSasMissingOnClone, "no smartphone license on this clone");

  auto raw_sas = try_dearmor(*state.sas);
  if (!raw_sas) throw Error(ErrorCode::kTokenMacMismatch, "stored SAS is not valid armor");
  Sas sas = Sas::parse(*raw_sas);
  Cars cars = encode_cars(vm, sas, state.app_id, rng.array<16>(), keys);
  std::string armored_cas = authority.activate_cloud(armor(cars.to_bytes()));

  auto raw_cas = try_dearmor(armored_cas);
  ValidationOutcome outcome = raw_cas ? verify_cas(*raw_cas, vm, *raw_sas, keys)
                                      : ValidationOutcome::invalid(ErrorCode::kArmorMalformed);
  if (!outcome.is_valid()) {
    throw Error(ErrorCode::kCasRejectedLocally,
                "authority returned a CAS that does not match this VM (" + outcome.to_string() + ")");
  }
  state.cas = armored_cas;
  store.store(state);
  return state;
}

GateVerdict clone_gate(const VmIdentity& vm, const ActivationState& state, const KeyMaterial& keys) {
  if (!state.sas) return GateVerdict::deny(DenyReason::kSasMissingOnClone);
  if (!state.cas) return GateVerdict::deny(DenyReason::kNotActivated);
  auto raw_sas = try_dearmor(*state.sas);
  auto raw_cas = try_dearmor(*state.cas);
  if (!raw_sas || !raw_cas) return GateVerdict::deny(DenyReason::kTokenMacMismatch);

  Sas sas;
  try {
    sas = Sas::parse(*raw_sas);
  } catch (const Error&) {
    return GateVerdict::deny(DenyReason::kTokenMacMismatch);
  }
  if (!sas_content_valid(sas, keys)) return GateVerdict::deny(DenyReason::kTokenMacMismatch);

  ValidationOutcome outcome = verify_cas(*raw_cas, vm, *raw_sas, keys);
  if (outcome.is_valid()) return GateVerdict::allow();
  switch (outcome.reason()) {
    case ErrorCode::kVmMismatch:
    case ErrorCode::kSasMismatch:
      return GateVerdict::deny(DenyReason::kVmMismatch);
    default:
      return GateVerdict::deny(DenyReason::kTokenMacMismatch);
  }
}

}  // namespace pirax
