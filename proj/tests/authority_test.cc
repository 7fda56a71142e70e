#include <gtest/gtest.h>

#include <json.hpp>
#include <thread>

#include "test_support.hpp"
#include "testbed.hpp"

namespace pirax {
namespace {

using nlohmann::json;
using testing::error_code;
using testing::TestBed;

const DeviceIdentity& phone() {
  static const DeviceIdentity d = parse_imei("490154203237518");
  return d;
}
const DeviceIdentity& other_phone() {
  static const DeviceIdentity d = parse_imei(testing::kOtherImei);
  return d;
}
const VmIdentity& vm() {
  static const VmIdentity v = parse_uuid("123e4567-e89b-12d3-a456-426614174000");
  return v;
}

TEST(AuthorityTest, FirstActivationIssuesVerifiableSas) {
  TestBed bed;
  PurchaseToken p = bed.entitle(LicenseType::kSmartphoneAndCloud);
  std::string sas = bed.client->activate_smartphone(bed.sars_for(phone(), p));
  EXPECT_TRUE(verify_sas(dearmor(sas), phone(), bed.keys).is_valid());
  LedgerState state = bed.authority->ledger().state();
  ASSERT_EQ(state.records.size(), 1u);
  EXPECT_EQ(state.records.begin()->second.sas, sas);
  EXPECT_EQ(state.records.begin()->second.imei, phone().imei());
}

TEST(AuthorityTest, ReactivationReturnsStoredSas) {
  TestBed bed;
  PurchaseToken p = bed.entitle(LicenseType::kSmartphoneOnly);
  std::string first = bed.client->activate_smartphone(bed.sars_for(phone(), p));
  std::string again = bed.client->activate_smartphone(bed.sars_for(phone(), p));
  EXPECT_EQ(first, again);
  EXPECT_EQ(bed.authority->ledger().entry_count(), 2u);  // entitlement + one record
}

TEST(AuthorityTest, SecondDeviceIsRefused) {
  TestBed bed;
  PurchaseToken p = bed.entitle(LicenseType::kSmartphoneOnly);
  bed.client->activate_smartphone(bed.sars_for(phone(), p));
  EXPECT_EQ(error_code([&] { bed.client->activate_smartphone(bed.sars_for(other_phone(), p)); }),
            ErrorCode::kAlreadyActivatedOnOtherDevice);
}

TEST(AuthorityTest, SmartphoneErrors) {
  TestBed bed;
  PurchaseToken unknown{bed.rng.array<16>()};
  EXPECT_EQ(error_code([&] { bed.client->activate_smartphone(bed.sars_for(phone(), unknown)); }),
            ErrorCode::kEntitlementNotFound);

  PurchaseToken p = bed.entitle(LicenseType::kSmartphoneOnly);
  Bytes raw = dearmor(bed.sars_for(phone(), p));
  raw[40] ^= 0x01;
  EXPECT_EQ(error_code([&] { bed.client->activate_smartphone(armor(raw)); }), ErrorCode::kTokenMacMismatch);
  EXPECT_EQ(error_code([&] { bed.client->activate_smartphone("not+armor"); }), ErrorCode::kArmorMalformed);
  EXPECT_EQ(error_code([&] { bed.client->activate_smartphone("AAEC"); }), ErrorCode::kSerialMalformed);

  // A request from an application this authority has no keys for.
  Sars foreign = encode_sars(phone(), ApplicationId{}, p, Nonce{}, bed.keys);
  EXPECT_EQ(error_code([&] { bed.client->activate_smartphone(armor(foreign.to_bytes())); }),
            ErrorCode::kEntitlementNotFound);
}

TEST(AuthorityTest, CloudActivationFlow) {
  TestBed bed;
  PurchaseToken p = bed.entitle(LicenseType::kSmartphoneAndCloud);
  std::string sas = bed.client->activate_smartphone(bed.sars_for(phone(), p));
  std::string cas = bed.client->activate_cloud(bed.cars_for(vm(), sas));
  EXPECT_TRUE(verify_cas(dearmor(cas), vm(), dearmor(sas), bed.keys).is_valid());

  // Same VM again, e.g. after restart: the stored CAS.
  EXPECT_EQ(bed.client->activate_cloud(bed.cars_for(vm(), sas)), cas);

  VmIdentity other = parse_uuid("123e4567-e89b-12d3-a456-426614174001");
  EXPECT_EQ(error_code([&] { bed.client->activate_cloud(bed.cars_for(other, sas)); }),
            ErrorCode::kCloudAlreadyBound);

  LicenseRecord rec = bed.authority->ledger().state().records.begin()->second;
  EXPECT_EQ(rec.cas, cas);
  EXPECT_EQ(rec.uuid, vm().to_string());
}

TEST(AuthorityTest, CloudErrors) {
  TestBed bed;
  PurchaseToken phone_only = bed.entitle(LicenseType::kSmartphoneOnly);
  std::string sas = bed.client->activate_smartphone(bed.sars_for(phone(), phone_only));
  EXPECT_EQ(error_code([&] { bed.client->activate_cloud(bed.cars_for(vm(), sas)); }),
            ErrorCode::kLicenseTypeInsufficient);

  // Correctly keyed but never issued by this authority.
  Sas minted = issue_sas(encode_sars(other_phone(), bed.app, PurchaseToken{}, Nonce{}, bed.keys),
                         Entitlement{bed.app, LicenseType::kSmartphoneAndCloud, PurchaseToken{}}, 5, bed.keys);
  EXPECT_EQ(error_code([&] { bed.client->activate_cloud(bed.cars_for(vm(), armor(minted.to_bytes()))); }),
            ErrorCode::kUnknownSas);

  Bytes cars = dearmor(bed.cars_for(vm(), sas));
  cars.back() ^= 0x01;
  EXPECT_EQ(error_code([&] { bed.client->activate_cloud(armor(cars)); }), ErrorCode::kTokenMacMismatch);
}

TEST(AuthorityTest, Entitlements) {
  TestBed bed;
  PurchaseToken p{bed.rng.array<16>()};
  bed.client->register_entitlement(bed.app, p, "phone+cloud");
  EXPECT_EQ(error_code([&] { bed.client->register_entitlement(bed.app, p, "phone+cloud"); }),
            ErrorCode::kDuplicateEntitlement);
  EXPECT_EQ(error_code([&] { bed.client->register_entitlement(bed.app, PurchaseToken{}, "phone+tablet"); }),
            ErrorCode::kValidationError);

  HttpResponse byte_type = bed.service->handle(
      "POST", "/v1/entitlements",
      json{{"app_id", bed.app.to_hex()}, {"purchase_token", std::string(32, '1')}, {"license_type", 3}}.dump());
  EXPECT_EQ(byte_type.status, 400);
  EXPECT_EQ(json::parse(byte_type.body)["code"], "ValidationError");
  HttpResponse ok = bed.service->handle(
      "POST", "/v1/entitlements",
      json{{"app_id", bed.app.to_hex()}, {"purchase_token", std::string(32, '1')}, {"license_type", 1}}.dump());
  EXPECT_EQ(ok.status, 200);
}

TEST(ServiceTest, RoutingAndErrorBodies) {
  TestBed bed;
  EXPECT_EQ(bed.service->handle("GET", "/v1/health", "").status, 200);
  EXPECT_TRUE(bed.client->healthy());
  HttpResponse missing = bed.service->handle("POST", "/v1/nope", "{}");
  EXPECT_EQ(missing.status, 404);
  EXPECT_EQ(json::parse(missing.body)["code"], "NotFound");
  EXPECT_EQ(bed.service->handle("GET", "/v1/activate/smartphone", "").status, 405);
  HttpResponse bad = bed.service->handle("POST", "/v1/activate/smartphone", "[1,2]");
  EXPECT_EQ(bad.status, 400);
  json body = json::parse(bad.body);
  EXPECT_EQ(body["code"], "ValidationError");
  EXPECT_TRUE(body["message"].is_string());
  EXPECT_EQ(json::parse(bed.service->handle("POST", "/v1/activate/cloud", "{}").body)["code"], "ValidationError");
}

TEST(ServiceTest, EnvelopeModeRejectsPlaintextAndCorruption) {
  TestBed bed(5, /*envelope=*/true);
  PurchaseToken p = bed.entitle(LicenseType::kSmartphoneAndCloud);
  std::string sas = bed.client->activate_smartphone(bed.sars_for(phone(), p));
  EXPECT_TRUE(verify_sas(dearmor(sas), phone(), bed.keys).is_valid());

  std::uint64_t before = bed.authority->serial_requests();
  HttpResponse plain =
      bed.service->handle("POST", "/v1/activate/smartphone", json{{"sars", bed.sars_for(phone(), p)}}.dump());
  EXPECT_EQ(plain.status, 400);
  EXPECT_EQ(json::parse(plain.body)["code"], "EnvelopeRejected");
  EXPECT_EQ(bed.authority->serial_requests(), before);

  // A client without the channel key cannot talk to it either.
  AuthorityClient keyless(*bed.transport, std::nullopt, bed.rng);
  EXPECT_EQ(error_code([&] { keyless.activate_smartphone(bed.sars_for(phone(), p)); }),
            ErrorCode::kEnvelopeRejected);
}

TEST(AuthorityTest, ConcurrentActivationsForOnePurchaseHaveOneWinner) {
  for (int round = 0; round < 20; ++round) {
    TestBed bed(100 + round);
    PurchaseToken p = bed.entitle(LicenseType::kSmartphoneOnly);
    std::string a = bed.sars_for(phone(), p);
    std::string b = bed.sars_for(other_phone(), p);
    std::array<ErrorCode, 2> outcome{ErrorCode::kInternalError, ErrorCode::kInternalError};
    std::array<bool, 2> won{false, false};
    std::thread ta([&] {
      try {
        bed.authority->activate_smartphone(a);
        won[0] = true;
      } catch (const Error& e) {
        outcome[0] = e.code();
      }
    });
    std::thread tb([&] {
      try {
        bed.authority->activate_smartphone(b);
        won[1] = true;
      } catch (const Error& e) {
        outcome[1] = e.code();
      }
    });
    ta.join();
    tb.join();
    ASSERT_NE(won[0], won[1]);
    EXPECT_EQ(outcome[won[0] ? 1 : 0], ErrorCode::kAlreadyActivatedOnOtherDevice);
    EXPECT_EQ(bed.authority->ledger().state().records.size(), 1u);
  }
}

TEST(AuthorityTest, StateSurvivesRestart) {
  auto path = std::filesystem::temp_directory_path() / "pirax-authority-restart.jsonl";
  std::filesystem::remove(path);
  std::string sas;
  PurchaseToken p;
  {
    TestBed bed(9, false, path);
    p = bed.entitle(LicenseType::kSmartphoneAndCloud);
    sas = bed.client->activate_smartphone(bed.sars_for(phone(), p));
  }
  TestBed again(9, false, path);  // same seed, same keys
  EXPECT_EQ(again.client->activate_smartphone(again.sars_for(phone(), p)), sas);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace pirax
