#include <gtest/gtest.h>

#include <json.hpp>

#include "pirax/envelope.hpp"

namespace pirax {
namespace {

Key256 key_of(std::uint8_t fill) {
  Key256 k{};
  k.fill(fill);
  return k;
}

TEST(AeadTest, SealOpen) {
  SeededRandom rng(1);
  ByteArray<12> nonce = rng.array<12>();
  Bytes msg{1, 2, 3, 4, 5};
  Bytes sealed = aead_seal(key_of(7), nonce, msg, as_bytes("aad"));
  EXPECT_EQ(sealed.size(), msg.size() + 16);
  EXPECT_EQ(aead_open(key_of(7), nonce, sealed, as_bytes("aad")), msg);
  EXPECT_THROW(aead_open(key_of(8), nonce, sealed, as_bytes("aad")), Error);
  EXPECT_THROW(aead_open(key_of(7), nonce, sealed, as_bytes("other")), Error);
  Bytes empty = aead_seal(key_of(7), nonce, {}, {});
  EXPECT_TRUE(aead_open(key_of(7), nonce, empty, {}).empty());
}

TEST(EnvelopeTest, RoundTripAndBinding) {
  SeededRandom rng(2);
  std::string sealed = seal_envelope(key_of(1), "/v1/activate/smartphone", R"({"sars":"x"})", rng);
  EXPECT_TRUE(looks_like_envelope(sealed));
  EXPECT_EQ(open_envelope(key_of(1), "/v1/activate/smartphone", sealed), R"({"sars":"x"})");
  auto code = [&](const Key256& key, std::string_view aad, std::string_view body) {
    try {
      open_envelope(key, aad, body);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternalError;
  };
  EXPECT_EQ(code(key_of(1), "/v1/activate/cloud", sealed), ErrorCode::kEnvelopeRejected);
  EXPECT_EQ(code(key_of(1), response_aad("/v1/activate/smartphone"), sealed), ErrorCode::kEnvelopeRejected);
  EXPECT_EQ(code(key_of(2), "/v1/activate/smartphone", sealed), ErrorCode::kEnvelopeRejected);
  EXPECT_EQ(code(key_of(1), "/", "not json"), ErrorCode::kEnvelopeRejected);
  EXPECT_EQ(code(key_of(1), "/", R"({"nonce":"AAAA","ciphertext":"AAAA"})"), ErrorCode::kEnvelopeRejected);
}

TEST(EnvelopeTest, NoncesAreFreshPerMessage) {
  SeededRandom rng(3);
  auto a = nlohmann::json::parse(seal_envelope(key_of(1), "/", "{}", rng));
  auto b = nlohmann::json::parse(seal_envelope(key_of(1), "/", "{}", rng));
  EXPECT_NE(a["nonce"], b["nonce"]);
  EXPECT_EQ(dearmor(a["nonce"].get<std::string>()).size(), 12u);
}

}  // namespace
}  // namespace pirax
