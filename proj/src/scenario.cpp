#include "pirax/scenario.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <set>

#include "pirax/agent.hpp"
#include "pirax/authority.hpp"
#include "pirax/client.hpp"
#include "pirax/service.hpp"

namespace pirax {
namespace {

using nlohmann::json;

constexpr std::uint64_t kEpoch = 1700000000;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::kScenarioMalformed, what); }

struct OpSpec {
  std::vector<const char*> required;
  bool needs_expect;
};

const std::map<std::string, OpSpec, std::less<>>& op_specs() {
  static const std::map<std::string, OpSpec, std::less<>> specs = {
      {"device", {{"name", "imei"}, false}},
      {"vm", {{"name", "uuid"}, false}},
      {"entitle", {{"purchase", "license_type"}, false}},
      {"device_activate", {{"device", "state", "purchase"}, false}},
      {"device_gate", {{"device", "state"}, true}},
      {"clone_activate", {{"vm", "state"}, false}},
      {"clone_gate", {{"vm", "state"}, true}},
      {"copy_state", {{"from", "to"}, false}},
      {"delete_state", {{"state"}, false}},
      {"restart_vm", {{"vm", "state"}, false}},
      {"tamper", {{"state", "field"}, false}},
      {"snapshot", {{"state", "field", "as"}, false}},
      {"compare_snapshot", {{"state", "field", "as"}, true}},
      {"forge_sas", {{"device", "trials"}, true}},
      {"tamper_sars", {{"device", "purchase"}, false}},
      {"rogue_cars", {{"vm", "device"}, false}},
  };
  return specs;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string arg(const ScenarioStep& step, const char* field) { return step.args.at(field).get<std::string>(); }

// Everything one scenario run touches. Nothing is shared between runs.
class World {
 public:
  explicit World(std::uint64_t seed)
      : rng_(seed),
        app_(ApplicationId{rng_.array<16>()}),
        keys_(KeyMaterial::generate(rng_)),
        channel_key_(rng_.array<32>()),
        authority_(make_ring(), Ledger(), [this] { return kEpoch + ticks_++; }),
        service_(authority_, channel_key_, rng_),
        transport_(service_),
        client_(transport_, channel_key_, rng_) {}

  std::string run(const ScenarioStep& step);

 private:
  KeyRing make_ring() const {
    KeyRing ring;
    ring.applications.emplace(app_, keys_);
    ring.channel_key = channel_key_;
    return ring;
  }

  const DeviceIdentity& device(const std::string& name) {
    auto it = devices_.find(name);
    if (it != devices_.end()) return it->second;
    std::string body;
    for (int i = 0; i < 14; ++i) body.push_back(static_cast<char>('0' + rng_.next_u64() % 10));
    return devices_.emplace(name, parse_imei(body + luhn_check_digit(body))).first->second;
  }

  const VmIdentity& vm(const std::string& name) {
    auto it = vms_.find(name);
    if (it != vms_.end()) return it->second;
    ByteArray<16> bytes = rng_.array<16>();
    bytes[6] = static_cast<std::uint8_t>((bytes[6] & 0x0f) | 0x40);
    bytes[8] = static_cast<std::uint8_t>((bytes[8] & 0x3f) | 0x80);
    return vms_.emplace(name, vm_identity_from_bytes(bytes)).first->second;
  }

  const PurchaseToken& purchase(const std::string& name) {
    auto it = purchases_.find(name);
    if (it != purchases_.end()) return it->second;
    return purchases_.emplace(name, PurchaseToken{rng_.array<16>()}).first->second;
  }

  MemoryStateStore& state(const std::string& name) {
    auto& slot = states_[name];
    if (!slot) slot = std::make_unique<MemoryStateStore>();
    return *slot;
  }

  static std::optional<std::string>& field_of(ActivationState& s, const std::string& field) {
    if (field == "sas") return s.sas;
    if (field == "cas") return s.cas;
    malformed("field must be 'sas' or 'cas', got '" + field + "'");
  }

  std::string tamper(const ScenarioStep& step);
  std::string forge_sas(const ScenarioStep& step);

  SeededRandom rng_;
  std::uint64_t ticks_ = 0;
  ApplicationId app_;
  KeyMaterial keys_;
  Key256 channel_key_;
  LicenseAuthority authority_;
  ProviderService service_;
  LoopbackTransport transport_;
  AuthorityClient client_;
  std::map<std::string, DeviceIdentity> devices_;
  std::map<std::string, VmIdentity> vms_;
  std::map<std::string, PurchaseToken> purchases_;
  std::map<std::string, std::unique_ptr<MemoryStateStore>> states_;
  std::map<std::string, std::string> snapshots_;
};

std::string World::run(const ScenarioStep& step) {
  const std::string& op = step.op;
  if (op == "device") {
    devices_.insert_or_assign(arg(step, "name"), parse_imei(arg(step, "imei")));
    return "ok";
  }
  if (op == "vm") {
    vms_.insert_or_assign(arg(step, "name"), parse_uuid(arg(step, "uuid")));
    return "ok";
  }
  if (op == "entitle") {
    client_.register_entitlement(app_, purchase(arg(step, "purchase")), arg(step, "license_type"));
    return "ok";
  }
  if (op == "device_activate") {
    device_first_run(device(arg(step, "device")), app_, purchase(arg(step, "purchase")), client_, keys_,
                     state(arg(step, "state")), rng_, [this] { return kEpoch + ticks_++; });
    return "ok";
  }
  if (op == "device_gate") {
    return device_gate(device(arg(step, "device")), state(arg(step, "state")).load(), keys_).to_string();
  }
  if (op == "clone_activate") {
    clone_activate(vm(arg(step, "vm")), client_, keys_, state(arg(step, "state")), rng_);
    return "ok";
  }
  if (op == "clone_gate") {
    return clone_gate(vm(arg(step, "vm")), state(arg(step, "state")).load(), keys_).to_string();
  }
  if (op == "copy_state") {
    MemoryStateStore& from = state(arg(step, "from"));
    MemoryStateStore& to = state(arg(step, "to"));
    if (from.has_state()) {
      to.store(from.load());
    } else {
      to.clear();
    }
    return "ok";
  }
  if (op == "delete_state") {
    state(arg(step, "state")).clear();
    return "ok";
  }
  if (op == "restart_vm") {
    // The VM keeps its UUID; the clone's state comes back from storage.
    vm(arg(step, "vm"));
    MemoryStateStore& s = state(arg(step, "state"));
    if (s.has_state()) s.store(ActivationState::from_json(s.load().to_json()));
    return "ok";
  }
  if (op == "tamper") return tamper(step);
  if (op == "snapshot" || op == "compare_snapshot") {
    ActivationState s = state(arg(step, "state")).load();
    std::optional<std::string> value = field_of(s, arg(step, "field"));
    std::string key = arg(step, "as");
    if (op == "snapshot") {
      if (!value) return "missing";
      snapshots_[key] = *value;
      return "ok";
    }
    auto it = snapshots_.find(key);
    if (it == snapshots_.end()) malformed("no snapshot named '" + key + "'");
    return value && *value == it->second ? "same" : "different";
  }
  if (op == "forge_sas") return forge_sas(step);
  if (op == "tamper_sars") {
    Sars sars = encode_sars(device(arg(step, "device")), app_, purchase(arg(step, "purchase")),
                            rng_.array<16>(), keys_);
    Bytes raw = sars.to_bytes();
    // Past the version and kind bytes, so the request still parses and the
    // MAC check is what rejects it.
    std::size_t bit = 16 + rng_.next_u64() % (raw.size() * 8 - 16);
    raw[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    client_.activate_smartphone(armor(raw));
    return "ok";
  }
  if (op == "rogue_cars") {
    // A correctly keyed SAS the authority never issued, e.g. from a
    // replicated encoding module.
    Sars sars = encode_sars(device(arg(step, "device")), app_, PurchaseToken{rng_.array<16>()},
                            rng_.array<16>(), keys_);
    Entitlement fake{app_, LicenseType::kSmartphoneAndCloud, sars.purchase_token};
    Sas sas = issue_sas(sars, fake, kEpoch + ticks_++, keys_);
    Cars cars = encode_cars(vm(arg(step, "vm")), sas, app_, rng_.array<16>(), keys_);
    client_.activate_cloud(armor(cars.to_bytes()));
    return "ok";
  }
  malformed("unknown op '" + op + "'");
}

std::string World::tamper(const ScenarioStep& step) {
  MemoryStateStore& store = state(arg(step, "state"));
  ActivationState s = store.load();
  std::optional<std::string>& value = field_of(s, arg(step, "field"));
  if (!value) return "missing";
  Bytes raw = dearmor(*value);
  std::size_t flips = step.args.value("bits", 1u);
  std::set<std::size_t> positions;
  while (positions.size() < std::min(flips, raw.size() * 8)) positions.insert(rng_.next_u64() % (raw.size() * 8));
  for (std::size_t bit : positions) raw[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
  value = armor(raw);
  store.store(s);
  return "ok";
}

// An attacker who knows the IMEI and the public layout but not the keys:
// well-formed headers, random binding, random MAC.
std::string World::forge_sas(const ScenarioStep& step) {
  const DeviceIdentity& dev = device(arg(step, "device"));
  const auto trials = step.args.at("trials").get<std::size_t>();
  std::optional<std::string> first;
  for (std::size_t i = 0; i < trials; ++i) {
    Sas forged;
    forged.app_id = app_;
    forged.license_type = (rng_.next_u64() & 1) ? LicenseType::kSmartphoneAndCloud : LicenseType::kSmartphoneOnly;
    forged.issued_at = kEpoch + rng_.next_u64() % 1000000;
    forged.device_binding = rng_.array<32>();
    forged.mac = rng_.array<32>();
    ActivationState s;
    s.app_id = app_;
    s.sas = armor(forged.to_bytes());
    s.activated_at = kEpoch;
    std::string verdict = device_gate(dev, s, keys_).to_string();
    if (verdict == "Allow") return "Allow";
    if (!first) first = verdict;
    if (*first != verdict) return "mixed:" + *first + "," + verdict;
  }
  return first.value_or("none");
}

}  // namespace

Scenario Scenario::from_json(std::string_view text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (!doc.is_object()) malformed("scenario must be a JSON object");
  if (!doc.contains("name") || !doc["name"].is_string()) malformed("scenario needs a string 'name'");
  if (!doc.contains("steps") || !doc["steps"].is_array()) malformed("scenario needs a 'steps' array");
  Scenario s;
  s.name = doc["name"].get<std::string>();
  s.description = doc.value("description", std::string());
  std::size_t index = 0;
  for (const json& j : doc["steps"]) {
    ++index;
    const std::string where = s.name + " step " + std::to_string(index);
    if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) malformed(where + ": needs a string 'op'");
    ScenarioStep step;
    step.op = j["op"].get<std::string>();
    auto spec = op_specs().find(step.op);
    if (spec == op_specs().end()) malformed(where + ": unknown op '" + step.op + "'");
    for (const char* field : spec->second.required) {
      if (!j.contains(field)) malformed(where + ": '" + step.op + "' needs '" + field + "'");
      bool numeric = std::string_view(field) == "trials";
      if (numeric ? !j[field].is_number_unsigned() : !j[field].is_string()) {
        malformed(where + ": '" + field + "' has the wrong type");
      }
    }
    if (j.contains("expect")) {
      if (!j["expect"].is_string()) malformed(where + ": 'expect' must be a string");
      step.expect = j["expect"].get<std::string>();
    } else if (spec->second.needs_expect) {
      malformed(where + ": '" + step.op + "' needs 'expect'");
    } else {
      step.expect = "ok";
    }
    step.args = j;
    s.steps.push_back(std::move(step));
  }
  return s;
}

json ScenarioReport::to_json() const {
  return json{{"name", name},     {"seed", seed},         {"steps_executed", ops.size()},
              {"ops", ops},       {"observed", observed}, {"expected", expected},
              {"pass", pass}};
}

ScenarioReport run_scenario(const Scenario& scenario, std::uint64_t seed) {
  ScenarioReport report;
  report.name = scenario.name;
  report.seed = seed;
  World world(seed ^ fnv1a(scenario.name));
  for (const ScenarioStep& step : scenario.steps) {
    std::string observed;
    try {
      observed = world.run(step);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kScenarioMalformed) throw;
      observed = std::string(to_string(e.code()));
    } catch (const json::exception& e) {
      malformed(scenario.name + ": " + e.what());
    }
    report.ops.push_back(step.op);
    report.observed.push_back(std::move(observed));
    report.expected.push_back(step.expect);
  }
  report.pass = report.observed == report.expected;
  return report;
}

std::size_t RunSummary::passed() const {
  return static_cast<std::size_t>(
      std::count_if(reports.begin(), reports.end(), [](const ScenarioReport& r) { return r.pass; }));
}

json RunSummary::to_json() const {
  json list = json::array();
  for (const auto& r : reports) list.push_back(r.to_json());
  return json{{"seed", seed}, {"total", reports.size()}, {"passed", passed()}, {"failed", failed()},
              {"reports", list}};
}

RunSummary run_all(const std::vector<Scenario>& catalog, std::uint64_t seed) {
  RunSummary summary;
  summary.seed = seed;
  for (const Scenario& s : catalog) summary.reports.push_back(run_scenario(s, seed));
  return summary;
}

}  // namespace pirax
