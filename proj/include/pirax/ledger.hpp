#pragma once

// Append-only JSON-lines persistence for the license authority. Each line is
// one entry: an entitlement registration or a new version of a license
// record. Replaying the lines from the start reproduces the authority state;
// the latest version of a record wins.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pirax/identity.hpp"

namespace pirax {

using LicenseKey = std::pair<ApplicationId, PurchaseToken>;

struct EntitlementEntry {
  Entitlement entitlement;
  std::uint64_t created_at = 0;

  friend bool operator==(const EntitlementEntry&, const EntitlementEntry&) = default;
};

struct LicenseRecord {
  ApplicationId app_id;
  PurchaseToken purchase_token;
  LicenseType license_type = LicenseType::kSmartphoneOnly;
  std::string imei;
  std::string sas;  // armored
  std::optional<std::string> cas;
  std::optional<std::string> uuid;
  std::uint64_t created_at = 0;
  std::uint64_t updated_at = 0;

  LicenseKey key() const { return {app_id, purchase_token}; }

  friend bool operator==(const LicenseRecord&, const LicenseRecord&) = default;
};

using LedgerEntry = std::variant<EntitlementEntry, LicenseRecord>;

struct LedgerState {
  std::map<LicenseKey, EntitlementEntry> entitlements;
  std::map<LicenseKey, LicenseRecord> records;
  // Armored SAS -> owning record.
  std::map<std::string, LicenseKey> sas_index;

  // Enforces the single-binding rules. Throws Error(kLedgerCorrupt).
  void check(const LedgerEntry& entry) const;
  // check() then commit; the state is unchanged if check() throws.
  void apply(const LedgerEntry& entry);

  friend bool operator==(const LedgerState&, const LedgerState&) = default;
};

std::string serialize_entry(const LedgerEntry& entry);
// Throws Error(kLedgerCorrupt) without a line number.
LedgerEntry parse_entry(std::string_view line);

class Ledger {
 public:
  // In-memory ledger, nothing persisted.
  Ledger() = default;

  // Replays `path` (creating it if absent) and appends to it afterwards.
  // Throws Error(kLedgerCorrupt, "line N: ...") for bad content.
  static Ledger open(const std::filesystem::path& path);
  // Replay only.
  static LedgerState load(const std::filesystem::path& path);

  Ledger(Ledger&& other) noexcept;
  Ledger& operator=(Ledger&&) = delete;
  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  // Validates against the current state, writes and flushes the line, then
  // applies it. Thread-safe.
  void append(const LedgerEntry& entry);

  // Snapshot of the current state.
  LedgerState state() const;
  std::optional<EntitlementEntry> find_entitlement(const LicenseKey& key) const;
  std::optional<LicenseRecord> find_record(const LicenseKey& key) const;
  std::optional<LicenseKey> find_by_sas(const std::string& armored_sas) const;
  std::size_t entry_count() const;

 private:
  mutable std::shared_mutex mutex_;
  std::optional<std::filesystem::path> path_;
  std::ofstream out_;
  LedgerState state_;
  std::size_t entries_ = 0;
};

}  // namespace pirax
