#include <gtest/gtest.h>

#include <set>

#include "pirax/error.hpp"
#include "pirax/scenario.hpp"

namespace pirax {
namespace {

ErrorCode malformed_code(std::string_view text) {
  try {
    Scenario::from_json(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternalError;
}

TEST(ScenarioTest, CatalogPassesForSeveralSeeds) {
  for (std::uint64_t seed : {1u, 2u, 7u, 12345u}) {
    RunSummary summary = run_all(builtin_catalog(), seed);
    EXPECT_EQ(summary.reports.size(), 10u);
    for (const auto& r : summary.reports) {
      EXPECT_TRUE(r.pass) << r.name << " seed " << seed << "\n" << r.to_json().dump(2);
    }
  }
}

TEST(ScenarioTest, RunsAreDeterministic) {
  EXPECT_EQ(run_all(builtin_catalog(), 7).to_json(), run_all(builtin_catalog(), 7).to_json());
}

TEST(ScenarioTest, CatalogCoversEveryDenyReasonAndAuthorityError) {
  std::set<std::string> seen;
  for (const auto& r : run_all(builtin_catalog(), 3).reports) seen.insert(r.observed.begin(), r.observed.end());
  for (const char* want :
       {"Allow", "Deny(NotActivated)", "Deny(DeviceMismatch)", "Deny(VmMismatch)", "Deny(TokenMacMismatch)",
        "Deny(SasMissingOnClone)", "AlreadyActivatedOnOtherDevice", "CloudAlreadyBound",
        "LicenseTypeInsufficient", "TokenMacMismatch", "UnknownSas", "EntitlementNotFound"}) {
    EXPECT_TRUE(seen.count(want)) << want;
  }
}

TEST(ScenarioTest, NamesAreUnique) {
  std::set<std::string> names;
  for (const auto& s : builtin_catalog()) EXPECT_TRUE(names.insert(s.name).second) << s.name;
  EXPECT_EQ(builtin_scenario("tampered-serial").name, "tampered-serial");
  EXPECT_EQ(malformed_code("{}"), ErrorCode::kScenarioMalformed);
  try {
    builtin_scenario("no-such-scenario");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kScenarioMalformed);
  }
}

TEST(ScenarioTest, MalformedDocuments) {
  for (const char* text : {
           "not json",
           "[]",
           R"({"steps": []})",
           R"({"name": "x"})",
           R"({"name": "x", "steps": {}})",
           R"({"name": "x", "steps": [{"device": "A"}]})",
           R"({"name": "x", "steps": [{"op": "teleport"}]})",
           R"({"name": "x", "steps": [{"op": "device_gate", "device": "A", "state": "a"}]})",
       }) {
    EXPECT_EQ(malformed_code(text), ErrorCode::kScenarioMalformed) << text;
  }
}

TEST(ScenarioTest, UnexpectedObservationFailsTheRun) {
  Scenario s = Scenario::from_json(R"({"name": "wrong-expectation", "steps": [
    {"op": "device", "name": "A", "imei": "490154203237518"},
    {"op": "device_gate", "device": "A", "state": "a", "expect": "Allow"}]})");
  ScenarioReport r = run_scenario(s, 1);
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.observed.size(), 2u);
  EXPECT_EQ(r.observed[1], "Deny(NotActivated)");
  EXPECT_EQ(r.expected[1], "Allow");
}

}  // namespace
}  // namespace pirax
