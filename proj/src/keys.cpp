#include "pirax/keys.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pirax {

using nlohmann::json;

const KeyMaterial* KeyRing::find(const ApplicationId& app) const {
  auto it = applications.find(app);
  return it == applications.end() ? nullptr : &it->second;
}

const KeyMaterial& KeyRing::for_app(const ApplicationId& app) const {
  if (const KeyMaterial* k = find(app)) return *k;
  throw Error(ErrorCode::kKeysMissing, "no key material for application " + app.to_hex());
}

std::string KeyRing::to_json() const {
  json apps = json::array();
  for (const auto& [id, keys] : applications) {
    apps.push_back({{"app_id", id.to_hex()},
                    {"request_key", to_hex(keys.request_key)},
                    {"issue_key", to_hex(keys.issue_key)}});
  }
  json doc{{"channel_key", nullptr}, {"applications", apps}};
  if (channel_key) doc["channel_key"] = to_hex(*channel_key);
  return doc.dump(2);
}

KeyRing KeyRing::from_json(std::string_view text) {
  try {
    json doc = json::parse(text);
    KeyRing ring;
    if (doc.contains("channel_key") && !doc["channel_key"].is_null()) {
      ring.channel_key = fixed_from_hex<32>(doc["channel_key"].get<std::string>());
    }
    for (const json& a : doc.at("applications")) {
      ApplicationId id = ApplicationId::from_hex(a.at("app_id").get<std::string>());
      ring.applications.emplace(
          id, KeyMaterial::make(fixed_from_hex<32>(a.at("request_key").get<std::string>()),
                                fixed_from_hex<32>(a.at("issue_key").get<std::string>())));
    }
    return ring;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kValidationError, std::string("key file: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kValidationError, std::string("key file: ") + e.what());
  }
}

KeyRing KeyRing::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kKeysMissing, "cannot read key file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

void KeyRing::save(const std::filesystem::path& path) const {
  {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kInternalError, "cannot write key file " + path.string());
    out << to_json() << '\n';
  }
  std::filesystem::permissions(path, std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                               std::filesystem::perm_options::replace);
}

}  // namespace pirax
