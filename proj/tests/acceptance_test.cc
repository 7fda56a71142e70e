// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <atomic>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <thread>

#include "pirax/envelope.hpp"
#include "pirax/scenario.hpp"
#include "test_support.hpp"
#include "testbed.hpp"

namespace pirax {
namespace {

using nlohmann::json;
using testing::error_code;
using testing::TestBed;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

// ---- 1 ----
Check scenario_matrix() {
  Check c;
  auto start = std::chrono::steady_clock::now();
  std::size_t runs = 0;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RunSummary s = run_all(builtin_catalog(), seed);
    c.require(s.reports.size() == 10, "catalog size " + std::to_string(s.reports.size()));
    for (const auto& r : s.reports) c.require(r.pass, r.name + " failed with seed " + std::to_string(seed));
    runs += s.reports.size();
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.require(secs < 10.0, "took " + std::to_string(secs) + " s");
  if (c.ok) c.detail = std::to_string(runs) + " runs in " + std::to_string(secs) + " s";
  return c;
}

// ---- 2 ----
Check codec_oracle() {
  Check c;
  const json& g = testing::golden();
  KeyMaterial keys = testing::golden_keys();
  ApplicationId app = ApplicationId::from_hex(g["inputs"]["app_id"].get<std::string>());
  PurchaseToken purchase = PurchaseToken::from_hex(g["inputs"]["purchase_token"].get<std::string>());
  Nonce nonce = fixed_from_hex<16>(g["inputs"]["nonce"].get<std::string>());
  auto issued = [&](const char* k) { return g["inputs"][k].get<std::uint64_t>(); };

  Sars sars = encode_sars(testing::golden_device(), app, purchase, nonce, keys);
  Sas sas = issue_sas(sars, Entitlement{app, LicenseType::kSmartphoneAndCloud, purchase}, issued("sas_issued_at"), keys);
  Sas sas_phone = issue_sas(sars, Entitlement{app, LicenseType::kSmartphoneOnly, purchase}, issued("sas_issued_at"), keys);
  Cars cars = encode_cars(testing::golden_vm(), sas, app, nonce, keys);
  Cas cas = issue_cas(cars, issued("cas_issued_at"), keys);

  auto same = [&](const char* name, const Bytes& bytes) {
    c.require(armor(bytes) == g[name]["armored"].get<std::string>(), std::string(name) + " differs from oracle");
  };
  same("sars", sars.to_bytes());
  same("sas", sas.to_bytes());
  same("sas_smartphone_only", sas_phone.to_bytes());
  same("cars", cars.to_bytes());
  same("cas", cas.to_bytes());
  for (const auto& ex : g["base64"]) {
    Bytes raw = from_hex(ex["hex"].get<std::string>());
    c.require(armor(raw) == ex["armored"].get<std::string>(), "base64 example " + ex["hex"].get<std::string>());
    c.require(dearmor(ex["armored"].get<std::string>()) == raw, "base64 decode " + ex["hex"].get<std::string>());
  }
  if (c.ok) c.detail = "5 serials + " + std::to_string(g["base64"].size()) + " base64 examples";
  return c;
}

// ---- 3 ----
Check tamper_totality() {
  Check c;
  KeyMaterial keys = testing::golden_keys();
  DeviceIdentity dev = testing::golden_device();
  VmIdentity vm = testing::golden_vm();
  Bytes sas = testing::golden_bytes("sas");
  Bytes cas = testing::golden_bytes("cas");
  c.require(verify_sas(sas, dev, keys).is_valid(), "golden Sas invalid");
  c.require(verify_cas(cas, vm, sas, keys).is_valid(), "golden Cas invalid");
  std::size_t flips = 0;
  for (std::size_t bit = 0; bit < sas.size() * 8; ++bit, ++flips) {
    Bytes t = sas;
    t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    c.require(!verify_sas(t, dev, keys).is_valid(), "Sas bit " + std::to_string(bit) + " accepted");
  }
  for (std::size_t bit = 0; bit < cas.size() * 8; ++bit, ++flips) {
    Bytes t = cas;
    t[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    c.require(!verify_cas(t, vm, sas, keys).is_valid(), "Cas bit " + std::to_string(bit) + " accepted");
  }
  if (c.ok) c.detail = std::to_string(flips) + " single-bit flips, 0 accepted";
  return c;
}

// ---- 4 ----
Check cross_identity() {
  Check c;
  KeyMaterial keys = testing::golden_keys();
  DeviceIdentity dev = testing::golden_device();
  VmIdentity vm = testing::golden_vm();
  Bytes sas = testing::golden_bytes("sas");
  Bytes cas = testing::golden_bytes("cas");
  std::mt19937_64 rng(2024);
  int devices = 0, vms = 0;
  while (devices < 1000) {
    std::string imei = testing::random_imei_text(rng);
    if (imei == dev.imei()) continue;
    ++devices;
    ValidationOutcome o = verify_sas(sas, parse_imei(imei), keys);
    c.require(!o.is_valid() && o.reason() == ErrorCode::kDeviceMismatch, "IMEI " + imei + ": " + o.to_string());
  }
  while (vms < 1000) {
    std::string uuid = testing::random_uuid_text(rng);
    VmIdentity other = parse_uuid(uuid);
    if (other.bytes() == vm.bytes()) continue;
    ++vms;
    ValidationOutcome o = verify_cas(cas, other, sas, keys);
    c.require(!o.is_valid() && o.reason() == ErrorCode::kVmMismatch, "UUID " + uuid + ": " + o.to_string());
  }
  if (c.ok) c.detail = "1000 IMEIs -> DeviceMismatch, 1000 UUIDs -> VmMismatch";
  return c;
}

// ---- 5 ----
Check non_extractability() {
  Check c;
  TestBed bed(55);
  std::mt19937_64 rng(55);
  int clean = 0;
  for (int i = 0; i < 1000; ++i) {
    DeviceIdentity dev = parse_imei(testing::random_imei_text(rng));
    PurchaseToken p = bed.entitle(i % 2 ? LicenseType::kSmartphoneOnly : LicenseType::kSmartphoneAndCloud);
    Bytes raw = dearmor(bed.authority->activate_smartphone(bed.sars_for(dev, p)));
    std::string body(raw.begin(), raw.end());
    std::string armored = armor(raw);
    bool leaked = body.find(dev.imei()) != std::string::npos || armored.find(dev.imei()) != std::string::npos ||
                  to_hex(raw).find(dev.imei()) != std::string::npos;
    c.require(!leaked, "IMEI " + dev.imei() + " visible in its Sas");
    if (!leaked) ++clean;
  }
  if (c.ok) c.detail = std::to_string(clean) + "/1000 Sas without the IMEI digits";
  return c;
}

// ---- 6 ----
Check idempotence_and_races() {
  Check c;
  {
    TestBed bed(66);
    DeviceIdentity dev = testing::golden_device();
    PurchaseToken p = bed.entitle(LicenseType::kSmartphoneAndCloud);
    std::string first = bed.client->activate_smartphone(bed.sars_for(dev, p));
    int identical = 1;
    for (int i = 1; i < 100; ++i) {
      if (bed.client->activate_smartphone(bed.sars_for(dev, p)) == first) ++identical;
    }
    c.require(identical == 100, std::to_string(identical) + "/100 identical responses");
    c.require(bed.authority->ledger().state().records.size() == 1, "more than one ledger key");
  }
  std::mt19937_64 jitter(6);
  int clean_rounds = 0;
  for (int round = 0; round < 100; ++round) {
    TestBed bed(1000 + round);
    PurchaseToken p = bed.entitle(LicenseType::kSmartphoneOnly);
    std::array<std::string, 2> sars = {bed.sars_for(testing::golden_device(), p),
                                       bed.sars_for(parse_imei(testing::kOtherImei), p)};
    std::array<std::chrono::microseconds, 2> delay = {std::chrono::microseconds(jitter() % 200),
                                                       std::chrono::microseconds(jitter() % 200)};
    std::array<ErrorCode, 2> code{ErrorCode::kInternalError, ErrorCode::kInternalError};
    std::array<bool, 2> won{false, false};
    std::atomic<bool> go{false};
    auto worker = [&](int i) {
      while (!go.load()) std::this_thread::yield();
      std::this_thread::sleep_for(delay[i]);
      try {
        bed.authority->activate_smartphone(sars[i]);
        won[i] = true;
      } catch (const Error& e) {
        code[i] = e.code();
      }
    };
    std::thread a(worker, 0), b(worker, 1);
    go = true;
    a.join();
    b.join();
    bool ok = won[0] != won[1] && code[won[0] ? 1 : 0] == ErrorCode::kAlreadyActivatedOnOtherDevice &&
              bed.authority->ledger().state().records.size() == 1;
    c.require(ok, "interleaving " + std::to_string(round));
    if (ok) ++clean_rounds;
  }
  if (c.ok) c.detail = "100 identical Sas, 1 ledger key; " + std::to_string(clean_rounds) + "/100 races with one winner";
  return c;
}

// ---- 7 ----
Check ledger_replay() {
  Check c;
  auto path = std::filesystem::temp_directory_path() / ("pirax-accept-ledger-" + std::to_string(::getpid()));
  std::filesystem::remove(path);
  std::vector<LedgerState> after;  // after[k] = state after k operations
  after.push_back(LedgerState{});
  {
    TestBed bed(77, false, path);
    auto snap = [&] { after.push_back(bed.authority->ledger().state()); };
    std::mt19937_64 rng(77);
    std::vector<std::pair<PurchaseToken, LicenseType>> purchases;
    for (int i = 0; i < 6; ++i) {
      LicenseType t = i % 3 == 0 ? LicenseType::kSmartphoneOnly : LicenseType::kSmartphoneAndCloud;
      purchases.emplace_back(bed.entitle(t), t);
      snap();
    }
    for (auto& [p, t] : purchases) {
      std::string sas = bed.authority->activate_smartphone(bed.sars_for(parse_imei(testing::random_imei_text(rng)), p));
      snap();
      if (t == LicenseType::kSmartphoneAndCloud) {
        bed.authority->activate_cloud(bed.cars_for(parse_uuid(testing::random_uuid_text(rng)), sas));
        snap();
      }
    }
  }
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  c.require(lines.size() + 1 == after.size(), "line count " + std::to_string(lines.size()));
  auto cut = std::filesystem::path(path.string() + ".cut");
  for (std::size_t k = 0; c.ok && k <= lines.size(); ++k) {
    {
      std::ofstream out(cut, std::ios::trunc);
      for (std::size_t i = 0; i < k; ++i) out << lines[i] << '\n';
    }
    try {
      c.require(Ledger::load(cut) == after[k], "state mismatch at prefix " + std::to_string(k));
    } catch (const Error& e) {
      c.require(false, "prefix " + std::to_string(k) + ": " + e.what());
    }
  }
  std::filesystem::remove(path);
  std::filesystem::remove(cut);
  if (c.ok) c.detail = std::to_string(lines.size() + 1) + " prefixes replayed";
  return c;
}

// ---- 8 ----
Check license_type_enforcement() {
  Check c;
  TestBed bed(88);
  std::mt19937_64 rng(88);
  int refused = 0;
  for (int i = 0; i < 100; ++i) {
    PurchaseToken p = bed.entitle(LicenseType::kSmartphoneOnly);
    std::string sas = bed.client->activate_smartphone(bed.sars_for(parse_imei(testing::random_imei_text(rng)), p));
    std::string cars = bed.cars_for(parse_uuid(testing::random_uuid_text(rng)), sas);
    if (error_code([&] { bed.client->activate_cloud(cars); }) == ErrorCode::kLicenseTypeInsufficient) ++refused;
  }
  c.require(refused == 100, std::to_string(refused) + "/100 refused");
  if (c.ok) c.detail = "100/100 LicenseTypeInsufficient";
  return c;
}

// ---- 9 ----
Check loopback_http() {
  Check c;
  TestBed bed(99, /*envelope=*/true);
  HttpServer server(*bed.service);
  int port = server.bind("127.0.0.1", 0);
  server.start();
  std::string url = "http://127.0.0.1:" + std::to_string(port);
  try {
    HttpTransport http(url);
    AuthorityClient client(http, bed.channel, bed.rng);
    DeviceIdentity dev = testing::golden_device();
    VmIdentity vm = testing::golden_vm();
    PurchaseToken p{bed.rng.array<16>()};
    client.register_entitlement(bed.app, p, "phone+cloud");

    MemoryStateStore phone, clone;
    device_first_run(dev, bed.app, p, client, bed.keys, phone, bed.rng);
    std::string dv = device_gate(dev, phone.load(), bed.keys).to_string();
    clone.store(phone.load());
    clone_activate(vm, client, bed.keys, clone, bed.rng);
    std::string cv = clone_gate(vm, clone.load(), bed.keys).to_string();
    c.require(dv == "Allow" && cv == "Allow", "gates: " + dv + " / " + cv);

    // Same flow, envelope ciphertext corrupted in transit.
    PurchaseToken p2{bed.rng.array<16>()};
    client.register_entitlement(bed.app, p2, "phone+cloud");
    std::uint64_t before = bed.authority->serial_requests();
    std::string path = "/v1/activate/smartphone";
    json env = json::parse(seal_envelope(*bed.channel, path, json{{"sars", bed.sars_for(dev, p2)}}.dump(), bed.rng));
    Bytes ct = dearmor(env["ciphertext"].get<std::string>());
    ct[ct.size() / 2] ^= 0x01;
    env["ciphertext"] = armor(ct);
    HttpResponse r = http.request("POST", path, env.dump());
    std::string code = json::parse(r.body).value("code", "");
    c.require(r.status == 400 && code == "EnvelopeRejected", "corrupted request answered " + std::to_string(r.status) + " " + code);
    c.require(bed.authority->serial_requests() == before, "serial decoded despite bad envelope");
    c.require(!bed.authority->ledger().find_record({bed.app, p2}), "record created despite bad envelope");
    if (c.ok) c.detail = "Allow/Allow over " + url + "; corrupted envelope -> EnvelopeRejected, 0 serials decoded";
  } catch (const std::exception& e) {
    c.require(false, e.what());
  }
  server.stop();
  return c;
}

}  // namespace
}  // namespace pirax

int main() {
  using Criterion = std::pair<const char*, std::function<pirax::Check()>>;
  const Criterion criteria[] = {
      {"scenario matrix", pirax::scenario_matrix},
      {"codec oracle equivalence", pirax::codec_oracle},
      {"tamper totality", pirax::tamper_totality},
      {"cross-identity rejection", pirax::cross_identity},
      {"non-extractability", pirax::non_extractability},
      {"authority idempotence", pirax::idempotence_and_races},
      {"ledger replay", pirax::ledger_replay},
      {"license-type enforcement", pirax::license_type_enforcement},
      {"end-to-end loopback HTTP with envelope", pirax::loopback_http},
  };
  int failed = 0, n = 0;
  for (const auto& [name, run] : criteria) {
    ++n;
    pirax::Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (!c.ok) ++failed;
    std::cout << (c.ok ? "PASS" : "FAIL") << " criterion " << n << " " << name << ": " << c.detail << std::endl;
  }
  std::cout << (n - failed) << "/" << n << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
