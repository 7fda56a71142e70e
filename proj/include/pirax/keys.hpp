#pragma once

#include <filesystem>
#include <map>
#include <optional>

#include "pirax/serial.hpp"

namespace pirax {

// Per-application key material plus the optional channel key used by the
// encrypted request envelope. On disk:
//
//   {"channel_key": "<64 hex>" | null,
//    "applications": [{"app_id": "<32 hex>",
//                      "request_key": "<64 hex>",
//                      "issue_key": "<64 hex>"}]}
struct KeyRing {
  std::map<ApplicationId, KeyMaterial> applications;
  std::optional<Key256> channel_key;

  // Throws Error(kKeysMissing).
  const KeyMaterial& for_app(const ApplicationId& app) const;
  const KeyMaterial* find(const ApplicationId& app) const;

  std::string to_json() const;
  // Throws Error(kValidationError) on malformed content.
  static KeyRing from_json(std::string_view text);

  // Throws Error(kKeysMissing) if the file cannot be read.
  static KeyRing load(const std::filesystem::path& path);
  // Written with owner-only permissions.
  void save(const std::filesystem::path& path) const;
};

}  // namespace pirax
