#include "pirax/envelope.hpp"

#include <json.hpp>

#include "pirax/error.hpp"

namespace pirax {

using nlohmann::json;

std::string seal_envelope(const Key256& channel_key, std::string_view aad, std::string_view plaintext,
                          RandomSource& rng) {
  ByteArray<12> nonce = rng.array<12>();
  Bytes sealed = aead_seal(channel_key, nonce, as_bytes(plaintext), as_bytes(aad));
  return json{{"nonce", armor(nonce)}, {"ciphertext", armor(sealed)}}.dump();
}

std::string open_envelope(const Key256& channel_key, std::string_view aad, std::string_view body) {
  ByteArray<12> nonce{};
  Bytes sealed;
  try {
    json doc = json::parse(body);
    Bytes raw_nonce = dearmor(doc.at("nonce").get<std::string>());
    if (raw_nonce.size() != nonce.size()) throw Error(ErrorCode::kEnvelopeRejected, "nonce must be 12 bytes");
    std::copy(raw_nonce.begin(), raw_nonce.end(), nonce.begin());
    sealed = dearmor(doc.at("ciphertext").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kEnvelopeRejected, std::string("malformed envelope: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kEnvelopeRejected, std::string("malformed envelope: ") + e.what());
  }
  Bytes plain = aead_open(channel_key, nonce, sealed, as_bytes(aad));
  return std::string(plain.begin(), plain.end());
}

bool looks_like_envelope(std::string_view body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  return doc.is_object() && doc.size() == 2 && doc.contains("nonce") && doc.contains("ciphertext");
}

}  // namespace pirax
