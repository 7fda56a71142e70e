// pirax: license authority, device agent, clone agent and scenario harness.
//
// Exit codes: 0 success / Allow, 1 operational error / Deny / failing
// scenario, 2 usage error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pirax/agent.hpp"
#include "pirax/authority.hpp"
#include "pirax/client.hpp"
#include "pirax/keys.hpp"
#include "pirax/scenario.hpp"
#include "pirax/service.hpp"

namespace {

using nlohmann::json;
using namespace pirax;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string keys_path;
  bool envelope = false;
  bool json_output = false;
  std::string listen = "127.0.0.1:8700";
  std::string ledger_path;
  std::string authority = "http://127.0.0.1:8700";
  std::string state_path;
  std::string imei;
  std::string uuid;
  std::string app;
  std::string purchase;
  std::string license_type;
  std::string scenario;
  std::string scenario_file;
  std::uint64_t seed = 1;
  std::string out_path;
};

KeyRing load_keys(const Options& opt) {
  std::string path = opt.keys_path;
  if (path.empty()) {
    if (const char* env = std::getenv("PIRAX_KEYS")) path = env;
  }
  if (path.empty()) throw Error(ErrorCode::kKeysMissing, "no key file: pass --keys or set PIRAX_KEYS");
  return KeyRing::load(path);
}

std::optional<Key256> channel_key(const Options& opt, const KeyRing& ring) {
  if (!opt.envelope) return std::nullopt;
  if (!ring.channel_key) throw Error(ErrorCode::kKeysMissing, "--envelope needs a channel_key in the key file");
  return ring.channel_key;
}

std::pair<std::string, int> split_listen(const std::string& listen) {
  auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected HOST:PORT");
  try {
    return {listen.substr(0, colon), std::stoi(listen.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--listen", "expected HOST:PORT");
  }
}

int print_verdict(const GateVerdict& verdict, bool as_json) {
  if (as_json) {
    std::cout << json{{"verdict", verdict.to_string()}, {"allowed", verdict.allowed()}}.dump() << '\n';
  } else {
    std::cout << verdict.to_string() << '\n';
  }
  return verdict.allowed() ? kExitOk : kExitFailure;
}

int print_state(const ActivationState& state, bool as_json) {
  if (as_json) {
    std::cout << json::parse(state.to_json()).dump() << '\n';
  } else {
    std::cout << "activated" << (state.cas ? " (smartphone and cloud)" : "") << '\n';
  }
  return kExitOk;
}

int provider_serve(const Options& opt) {
  auto [host, port] = split_listen(opt.listen);
  if (opt.ledger_path.empty()) throw CLI::ValidationError("--ledger", "required");
  KeyRing ring = load_keys(opt);
  auto channel = channel_key(opt, ring);
  LicenseAuthority authority(ring, Ledger::open(opt.ledger_path));
  SystemRandom rng;
  ProviderService service(authority, channel, rng);
  HttpServer server(service);
  int bound = server.bind(host, port);
  std::cerr << "pirax provider listening on " << host << ':' << bound
            << (channel ? " (envelope on)" : "") << std::endl;
  server.run();
  return kExitOk;
}

int provider_entitle(const Options& opt) {
  Entitlement e{ApplicationId::from_hex(opt.app), parse_license_type(opt.license_type),
                PurchaseToken::from_hex(opt.purchase)};
  if (!opt.ledger_path.empty()) {
    // Offline registration straight into the ledger of a stopped provider.
    KeyRing ring = load_keys(opt);
    LicenseAuthority authority(ring, Ledger::open(opt.ledger_path));
    authority.register_entitlement(e);
  } else {
    std::optional<Key256> channel;
    if (opt.envelope) channel = channel_key(opt, load_keys(opt));
    SystemRandom rng;
    HttpTransport transport(opt.authority);
    AuthorityClient client(transport, channel, rng);
    client.register_entitlement(e.app_id, e.purchase_token, opt.license_type);
  }
  if (opt.json_output) {
    std::cout << json{{"status", "ok"}}.dump() << '\n';
  } else {
    std::cout << "entitled " << e.purchase_token.to_hex() << " (" << to_string(e.license_type) << ")\n";
  }
  return kExitOk;
}

int device_activate(const Options& opt) {
  DeviceIdentity dev = parse_imei(opt.imei);
  ApplicationId app = ApplicationId::from_hex(opt.app);
  PurchaseToken purchase = PurchaseToken::from_hex(opt.purchase);
  KeyRing ring = load_keys(opt);
  SystemRandom rng;
  HttpTransport transport(opt.authority);
  AuthorityClient client(transport, channel_key(opt, ring), rng);
  FileStateStore store(opt.state_path);
  return print_state(device_first_run(dev, app, purchase, client, ring.for_app(app), store, rng),
                     opt.json_output);
}

int device_run(const Options& opt) {
  DeviceIdentity dev = parse_imei(opt.imei);
  ActivationState state = state_load(opt.state_path);
  KeyRing ring = load_keys(opt);
  return print_verdict(device_gate(dev, state, ring.for_app(state.app_id)), opt.json_output);
}

int cloud_activate(const Options& opt) {
  VmIdentity vm = parse_uuid(opt.uuid);
  KeyRing ring = load_keys(opt);
  FileStateStore store(opt.state_path);
  ApplicationId app = store.load().app_id;
  SystemRandom rng;
  HttpTransport transport(opt.authority);
  AuthorityClient client(transport, channel_key(opt, ring), rng);
  return print_state(clone_activate(vm, client, ring.for_app(app), store, rng), opt.json_output);
}

int cloud_run(const Options& opt) {
  VmIdentity vm = parse_uuid(opt.uuid);
  ActivationState state = state_load(opt.state_path);
  KeyRing ring = load_keys(opt);
  return print_verdict(clone_gate(vm, state, ring.for_app(state.app_id)), opt.json_output);
}

int print_summary(const RunSummary& summary, bool as_json) {
  if (as_json) {
    std::cout << summary.to_json().dump() << '\n';
  } else {
    for (const auto& r : summary.reports) {
      std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << '\n';
      if (!r.pass) {
        for (std::size_t i = 0; i < r.ops.size(); ++i) {
          if (r.observed[i] != r.expected[i]) {
            std::cout << "  step " << i + 1 << " " << r.ops[i] << ": observed " << r.observed[i]
                      << ", expected " << r.expected[i] << '\n';
          }
        }
      }
    }
    std::cout << summary.passed() << "/" << summary.reports.size() << " scenarios passed (seed "
              << summary.seed << ")\n";
  }
  return summary.failed() == 0 ? kExitOk : kExitFailure;
}

int sim_run(const Options& opt) {
  std::vector<Scenario> selected;
  if (!opt.scenario_file.empty()) {
    std::ifstream in(opt.scenario_file);
    if (!in) throw Error(ErrorCode::kScenarioMalformed, "cannot read " + opt.scenario_file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    selected.push_back(Scenario::from_json(text));
  } else if (!opt.scenario.empty()) {
    selected.push_back(builtin_scenario(opt.scenario));
  } else {
    throw CLI::ValidationError("sim run", "pass --scenario NAME or --file PATH");
  }
  return print_summary(run_all(selected, opt.seed), opt.json_output);
}

int keygen(const Options& opt) {
  if (std::filesystem::exists(opt.out_path)) {
    throw Error(ErrorCode::kValidationError, opt.out_path + " already exists");
  }
  SystemRandom rng;
  KeyRing ring;
  ApplicationId app = opt.app.empty() ? ApplicationId{rng.array<16>()} : ApplicationId::from_hex(opt.app);
  ring.applications.emplace(app, KeyMaterial::generate(rng));
  ring.channel_key = rng.array<32>();
  ring.save(opt.out_path);
  if (opt.json_output) {
    std::cout << json{{"app_id", app.to_hex()}, {"path", opt.out_path}}.dump() << '\n';
  } else {
    std::cout << "wrote " << opt.out_path << " for application " << app.to_hex() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  std::function<int(const Options&)> action;

  CLI::App app{"pirax: application licensing bound to a smartphone IMEI and a cloud VM UUID"};
  app.require_subcommand(1);
  app.add_option("--keys", opt.keys_path, "Key file (default: $PIRAX_KEYS)");

  auto with_json = [&](CLI::App* cmd) { cmd->add_flag("--json", opt.json_output, "Print one JSON document"); };
  auto with_envelope = [&](CLI::App* cmd) {
    cmd->add_flag("--envelope", opt.envelope, "Encrypt request and response bodies with the channel key");
  };

  auto* provider = app.add_subcommand("provider", "License authority")->require_subcommand(1);
  auto* serve = provider->add_subcommand("serve", "Run the authority HTTP service");
  serve->add_option("--listen", opt.listen, "HOST:PORT")->capture_default_str();
  serve->add_option("--ledger", opt.ledger_path, "Append-only ledger file")->required();
  with_envelope(serve);
  serve->callback([&] { action = provider_serve; });

  auto* entitle = provider->add_subcommand("entitle", "Register a purchase");
  entitle->add_option("--app", opt.app, "Application id (32 hex)")->required();
  entitle->add_option("--purchase", opt.purchase, "Purchase token (32 hex)")->required();
  entitle->add_option("--type", opt.license_type, "phone | phone+cloud")
      ->required()
      ->check(CLI::IsMember({"phone", "phone+cloud"}));
  entitle->add_option("--authority", opt.authority, "Authority base URL")->capture_default_str();
  entitle->add_option("--ledger", opt.ledger_path, "Write to this ledger instead of calling the authority");
  with_envelope(entitle);
  with_json(entitle);
  entitle->callback([&] { action = provider_entitle; });

  auto* device = app.add_subcommand("device", "Smartphone agent")->require_subcommand(1);
  auto* dev_activate = device->add_subcommand("activate", "First-run activation");
  dev_activate->add_option("--imei", opt.imei, "Device IMEI")->required();
  dev_activate->add_option("--app", opt.app, "Application id (32 hex)")->required();
  dev_activate->add_option("--purchase", opt.purchase, "Purchase token (32 hex)")->required();
  dev_activate->add_option("--state", opt.state_path, "Activation state file")->required();
  dev_activate->add_option("--authority", opt.authority, "Authority base URL")->capture_default_str();
  with_envelope(dev_activate);
  with_json(dev_activate);
  dev_activate->callback([&] { action = device_activate; });

  auto* dev_run = device->add_subcommand("run", "Execution gate");
  dev_run->add_option("--imei", opt.imei, "Device IMEI")->required();
  dev_run->add_option("--state", opt.state_path, "Activation state file")->required();
  with_json(dev_run);
  dev_run->callback([&] { action = device_run; });

  auto* cloud = app.add_subcommand("cloud", "Clone agent")->require_subcommand(1);
  auto* cl_activate = cloud->add_subcommand("activate", "Cloud activation from the copied smartphone license");
  cl_activate->add_option("--uuid", opt.uuid, "VM UUID")->required();
  cl_activate->add_option("--state", opt.state_path, "Activation state file")->required();
  cl_activate->add_option("--authority", opt.authority, "Authority base URL")->capture_default_str();
  with_envelope(cl_activate);
  with_json(cl_activate);
  cl_activate->callback([&] { action = cloud_activate; });

  auto* cl_run = cloud->add_subcommand("run", "Execution gate");
  cl_run->add_option("--uuid", opt.uuid, "VM UUID")->required();
  cl_run->add_option("--state", opt.state_path, "Activation state file")->required();
  with_json(cl_run);
  cl_run->callback([&] { action = cloud_run; });

  auto* sim = app.add_subcommand("sim", "Scenario harness")->require_subcommand(1);
  auto* sim_one = sim->add_subcommand("run", "Run one scenario");
  sim_one->add_option("--scenario", opt.scenario, "Built-in scenario name");
  sim_one->add_option("--file", opt.scenario_file, "Scenario JSON file");
  sim_one->add_option("--seed", opt.seed, "Generator seed")->capture_default_str();
  with_json(sim_one);
  sim_one->callback([&] { action = sim_run; });

  auto* sim_all = sim->add_subcommand("all", "Run the built-in catalog");
  sim_all->add_option("--seed", opt.seed, "Generator seed")->capture_default_str();
  with_json(sim_all);
  sim_all->callback([&] {
    action = [](const Options& o) { return print_summary(run_all(builtin_catalog(), o.seed), o.json_output); };
  });

  auto* gen = app.add_subcommand("keygen", "Generate application keys and a channel key");
  gen->add_option("--out", opt.out_path, "Key file to create")->required();
  gen->add_option("--app", opt.app, "Application id (32 hex); random if omitted");
  with_json(gen);
  gen->callback([&] { action = keygen; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action(opt);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
