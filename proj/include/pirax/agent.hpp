#pragma once

// Device-side and clone-side license agents: first-run activation, local
// license storage, and the execution gate consulted before every run.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "pirax/authority.hpp"
#include "pirax/client.hpp"
#include "pirax/serial.hpp"

namespace pirax {

struct ActivationState {
  ApplicationId app_id;
  std::optional<std::string> sas;  // armored
  std::optional<std::string> cas;  // armored; only with sas
  std::optional<std::uint64_t> activated_at;

  bool activated() const { return sas.has_value(); }

  std::string to_json() const;
  // Throws Error(kStateCorrupt).
  static ActivationState from_json(std::string_view text);

  friend bool operator==(const ActivationState&, const ActivationState&) = default;
};

// Absent file -> default (not activated) state. Throws Error(kStateCorrupt).
ActivationState state_load(const std::filesystem::path& path);
// Writes a sibling temp file and renames it over `path`.
void state_store(const std::filesystem::path& path, const ActivationState& state);

// Where an agent keeps its ActivationState. lock() serializes activations
// and writes for one store.
class StateStore {
 public:
  virtual ~StateStore() = default;
  virtual ActivationState load() = 0;
  virtual void store(const ActivationState& state) = 0;
  virtual void clear() = 0;

  std::unique_lock<std::mutex> lock() { return std::unique_lock(mutex_); }

 private:
  std::mutex mutex_;
};

class FileStateStore final : public StateStore {
 public:
  explicit FileStateStore(std::filesystem::path path) : path_(std::move(path)) {}
  ActivationState load() override { return state_load(path_); }
  void store(const ActivationState& state) override { state_store(path_, state); }
  void clear() override { std::filesystem::remove(path_); }

 private:
  std::filesystem::path path_;
};

class MemoryStateStore final : public StateStore {
 public:
  ActivationState load() override { return state_.value_or(ActivationState{}); }
  void store(const ActivationState& state) override { state_ = state; }
  void clear() override { state_.reset(); }
  bool has_state() const { return state_.has_value(); }

 private:
  std::optional<ActivationState> state_;
};

enum class DenyReason {
  kNotActivated,
  kDeviceMismatch,
  kVmMismatch,
  kTokenMacMismatch,
  kSasMissingOnClone,
};

std::string_view to_string(DenyReason reason);

class GateVerdict {
 public:
  static GateVerdict allow() { return GateVerdict(std::nullopt); }
  static GateVerdict deny(DenyReason reason) { return GateVerdict(reason); }

  bool allowed() const { return !reason_; }
  DenyReason reason() const { return reason_.value_or(DenyReason::kNotActivated); }
  // "Allow" or "Deny(<reason>)".
  std::string to_string() const;

  friend bool operator==(const GateVerdict&, const GateVerdict&) = default;

 private:
  explicit GateVerdict(std::optional<DenyReason> reason) : reason_(reason) {}
  std::optional<DenyReason> reason_;
};

// Sends a SARS for `dev`, checks the returned SAS against `dev`, and persists
// it. On any failure nothing is written. Throws authority errors,
// kSasRejectedLocally, kAlreadyActivated, kTransportError.
ActivationState device_first_run(const DeviceIdentity& dev, const ApplicationId& app,
                                 const PurchaseToken& purchase, AuthorityClient& authority,
                                 const KeyMaterial& keys, StateStore& store, RandomSource& rng,
                                 const Clock& clock = system_clock_seconds);

// Pure: no I/O, no network.
GateVerdict device_gate(const DeviceIdentity& dev, const ActivationState& state, const KeyMaterial& keys);

// Sends a CARS built from `vm` and the state's SAS, checks the returned CAS,
// and persists the state with it. Throws authority errors,
// kSasMissingOnClone, kTokenMacMismatch (state's SAS does not verify),
// kCasRejectedLocally, kTransportError.
ActivationState clone_activate(const VmIdentity& vm, AuthorityClient& authority, const KeyMaterial& keys,
                               StateStore& store, RandomSource& rng);

GateVerdict clone_gate(const VmIdentity& vm, const ActivationState& state, const KeyMaterial& keys);

}  // namespace pirax
