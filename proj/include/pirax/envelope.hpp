#pragma once

// Authenticated encryption of HTTP bodies with a pre-shared 256-bit channel
// key. A sealed body is the JSON document
//
//   {"nonce": "<armored 12 bytes>", "ciphertext": "<armored ciphertext||tag>"}
//
// with the request path bound as associated data. Responses bind
// "<path>#response" so a request can never be replayed as a response.

#include <string>
#include <string_view>

#include "pirax/crypto.hpp"

namespace pirax {

std::string seal_envelope(const Key256& channel_key, std::string_view aad, std::string_view plaintext,
                          RandomSource& rng);

// Throws Error(kEnvelopeRejected) for anything other than an intact envelope.
std::string open_envelope(const Key256& channel_key, std::string_view aad, std::string_view body);

// True if `body` has the shape of an envelope (does not authenticate it).
bool looks_like_envelope(std::string_view body);

inline std::string response_aad(std::string_view path) { return std::string(path) + "#response"; }

}  // namespace pirax
