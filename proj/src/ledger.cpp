#include "pirax/ledger.hpp"

#include <json.hpp>

#include "pirax/error.hpp"

namespace pirax {
namespace {

using nlohmann::json;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::kLedgerCorrupt, what); }

json to_json(const LedgerEntry& entry) {
  if (const auto* e = std::get_if<EntitlementEntry>(&entry)) {
    return json{{"type", "entitlement"},
                {"app_id", e->entitlement.app_id.to_hex()},
                {"purchase_token", e->entitlement.purchase_token.to_hex()},
                {"license_type", to_string(e->entitlement.license_type)},
                {"created_at", e->created_at}};
  }
  const auto& r = std::get<LicenseRecord>(entry);
  json j{{"type", "license"},
         {"app_id", r.app_id.to_hex()},
         {"purchase_token", r.purchase_token.to_hex()},
         {"license_type", to_string(r.license_type)},
         {"imei", r.imei},
         {"sas", r.sas},
         {"cas", nullptr},
         {"uuid", nullptr},
         {"created_at", r.created_at},
         {"updated_at", r.updated_at}};
  if (r.cas) j["cas"] = *r.cas;
  if (r.uuid) j["uuid"] = *r.uuid;
  return j;
}

std::optional<std::string> optional_string(const json& j, const char* field) {
  const json& v = j.at(field);
  if (v.is_null()) return std::nullopt;
  return v.get<std::string>();
}

}  // namespace

void LedgerState::check(const LedgerEntry& entry) const {
  if (const auto* e = std::get_if<EntitlementEntry>(&entry)) {
    if (entitlements.count({e->entitlement.app_id, e->entitlement.purchase_token})) {
      corrupt("duplicate entitlement");
    }
    return;
  }
  const auto& r = std::get<LicenseRecord>(entry);
  auto ent = entitlements.find(r.key());
  if (ent == entitlements.end()) corrupt("license record without entitlement");
  if (ent->second.entitlement.license_type != r.license_type) corrupt("license type differs from entitlement");
  try {
    parse_imei(r.imei);
    if (r.uuid) parse_uuid(*r.uuid);
  } catch (const Error& e) {
    corrupt(std::string("invalid identity: ") + e.what());
  }
  if (r.cas && (r.license_type != LicenseType::kSmartphoneAndCloud || !r.uuid)) {
    corrupt("cloud license on a record without cloud entitlement or UUID");
  }
  if (r.uuid && !r.cas) corrupt("UUID recorded without CAS");
  auto prev = records.find(r.key());
  auto owner = sas_index.find(r.sas);
  if (owner != sas_index.end() && owner->second != r.key()) corrupt("SAS shared by two records");
  if (prev != records.end()) {
    const LicenseRecord& p = prev->second;
    if (p.imei != r.imei) corrupt("record rebinds to another IMEI");
    if (p.sas != r.sas) corrupt("record replaces its SAS");
    if (p.uuid && p.uuid != r.uuid) corrupt("record rebinds to another UUID");
  }
}

void LedgerState::apply(const LedgerEntry& entry) {
  check(entry);
  if (const auto* e = std::get_if<EntitlementEntry>(&entry)) {
    entitlements.emplace(LicenseKey{e->entitlement.app_id, e->entitlement.purchase_token}, *e);
  } else {
    const auto& r = std::get<LicenseRecord>(entry);
    records.insert_or_assign(r.key(), r);
    sas_index.insert_or_assign(r.sas, r.key());
  }
}

std::string serialize_entry(const LedgerEntry& entry) { return to_json(entry).dump(); }

LedgerEntry parse_entry(std::string_view line) {
  try {
    json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    ApplicationId app = ApplicationId::from_hex(j.at("app_id").get<std::string>());
    PurchaseToken purchase = PurchaseToken::from_hex(j.at("purchase_token").get<std::string>());
    LicenseType lt = parse_license_type(j.at("license_type").get<std::string>());
    if (type == "entitlement") {
      return EntitlementEntry{Entitlement{app, lt, purchase}, j.at("created_at").get<std::uint64_t>()};
    }
    if (type == "license") {
      LicenseRecord r;
      r.app_id = app;
      r.purchase_token = purchase;
      r.license_type = lt;
      r.imei = j.at("imei").get<std::string>();
      r.sas = j.at("sas").get<std::string>();
      r.cas = optional_string(j, "cas");
      r.uuid = optional_string(j, "uuid");
      r.created_at = j.at("created_at").get<std::uint64_t>();
      r.updated_at = j.at("updated_at").get<std::uint64_t>();
      return r;
    }
    corrupt("unknown entry type '" + type + "'");
  } catch (const json::exception& e) {
    corrupt(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kLedgerCorrupt) throw;
    corrupt(e.what());
  }
}

Ledger Ledger::open(const std::filesystem::path& path) {
  Ledger ledger;
  if (std::filesystem::exists(path)) {
    ledger.state_ = load(path);
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) ++ledger.entries_;
  }
  ledger.path_ = path;
  ledger.out_.open(path, std::ios::app | std::ios::binary);
  if (!ledger.out_) throw Error(ErrorCode::kLedgerCorrupt, "cannot open ledger " + path.string());
  return ledger;
}

LedgerState Ledger::load(const std::filesystem::path& path) {
  LedgerState state;
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) return state;
    throw Error(ErrorCode::kLedgerCorrupt, "cannot read ledger " + path.string());
  }
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    ++line_no;
    std::size_t nl = content.find('\n', pos);
    // Every complete entry ends with a newline; anything else is a torn write.
    if (nl == std::string::npos) {
      throw Error(ErrorCode::kLedgerCorrupt, "line " + std::to_string(line_no) + ": truncated entry");
    }
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    try {
      state.apply(parse_entry(line));
    } catch (const Error& e) {
      throw Error(ErrorCode::kLedgerCorrupt, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return state;
}

Ledger::Ledger(Ledger&& other) noexcept
    : path_(std::move(other.path_)),
      out_(std::move(other.out_)),
      state_(std::move(other.state_)),
      entries_(other.entries_) {}

void Ledger::append(const LedgerEntry& entry) {
  std::unique_lock lock(mutex_);
  state_.check(entry);
  if (path_) {
    out_ << serialize_entry(entry) << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::kInternalError, "ledger write failed");
  }
  state_.apply(entry);
  ++entries_;
}

LedgerState Ledger::state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

std::optional<EntitlementEntry> Ledger::find_entitlement(const LicenseKey& key) const {
  std::shared_lock lock(mutex_);
  auto it = state_.entitlements.find(key);
  if (it == state_.entitlements.end()) return std::nullopt;
  return it->second;
}

std::optional<LicenseRecord> Ledger::find_record(const LicenseKey& key) const {
  std::shared_lock lock(mutex_);
  auto it = state_.records.find(key);
  if (it == state_.records.end()) return std::nullopt;
  return it->second;
}

std::optional<LicenseKey> Ledger::find_by_sas(const std::string& armored_sas) const {
  std::shared_lock lock(mutex_);
  auto it = state_.sas_index.find(armored_sas);
  if (it == state_.sas_index.end()) return std::nullopt;
  return it->second;
}

std::size_t Ledger::entry_count() const {
  std::shared_lock lock(mutex_);
  return entries_;
}

}  // namespace pirax
