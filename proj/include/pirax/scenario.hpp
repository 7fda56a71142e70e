#pragma once

// Deterministic replay of attack and legitimate-use scenarios against an
// in-process authority and agents. Scenarios are JSON documents:
//
//   {"name": "...", "description": "...",
//    "steps": [{"op": "device_activate", "device": "A", "state": "a",
//               "purchase": "p1", "expect": "ok"}, ...]}
//
// Devices, VMs, purchases and states are symbolic names; identities and
// tokens are drawn from a generator seeded by (seed, scenario name).
// Every step yields one observation ("ok", "Allow", "Deny(<reason>)",
// "same"/"different", or an error code) compared against "expect"
// ("ok" when omitted; gate steps must state it).

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pirax {

struct ScenarioStep {
  std::string op;
  nlohmann::json args;
  std::string expect;
};

struct Scenario {
  std::string name;
  std::string description;
  std::vector<ScenarioStep> steps;

  // Throws Error(kScenarioMalformed).
  static Scenario from_json(std::string_view text);
};

struct ScenarioReport {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<std::string> ops;
  std::vector<std::string> observed;
  std::vector<std::string> expected;
  bool pass = false;

  nlohmann::json to_json() const;
};

ScenarioReport run_scenario(const Scenario& scenario, std::uint64_t seed);

struct RunSummary {
  std::uint64_t seed = 0;
  std::vector<ScenarioReport> reports;

  std::size_t passed() const;
  std::size_t failed() const { return reports.size() - passed(); }
  nlohmann::json to_json() const;
};

RunSummary run_all(const std::vector<Scenario>& catalog, std::uint64_t seed);

// The shipped threat-model catalog.
const std::vector<Scenario>& builtin_catalog();
// Throws Error(kScenarioMalformed) for unknown names.
const Scenario& builtin_scenario(std::string_view name);

}  // namespace pirax
