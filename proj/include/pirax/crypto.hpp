#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "pirax/bytes.hpp"

namespace pirax {

using Key256 = ByteArray<32>;
using Mac256 = ByteArray<32>;

// HMAC-SHA-256.
Mac256 hmac_sha256(const Key256& key, ByteView message);

// Timing independent of where the inputs first differ.
bool constant_time_equal(ByteView a, ByteView b);

// Unpadded URL-safe base64.
std::string armor(ByteView bytes);
// Throws Error(kArmorMalformed) on characters outside the URL-safe alphabet,
// padding, or an impossible length.
Bytes dearmor(std::string_view text);

class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  template <std::size_t N>
  ByteArray<N> array() {
    ByteArray<N> out{};
    fill(out);
    return out;
  }
};

// Operating-system CSPRNG.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// Reproducible stream for simulations and tests. Not for key generation.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}
  void fill(std::span<std::uint8_t> out) override;
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// AES-256-GCM. Output is ciphertext followed by the 16-byte tag.
Bytes aead_seal(const Key256& key, const ByteArray<12>& nonce, ByteView plaintext, ByteView aad);
// Throws Error(kEnvelopeRejected) when authentication fails.
Bytes aead_open(const Key256& key, const ByteArray<12>& nonce, ByteView sealed, ByteView aad);

}  // namespace pirax
