#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pirax/error.hpp"

namespace pirax {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <std::size_t N>
using ByteArray = std::array<std::uint8_t, N>;

std::string to_hex(ByteView bytes);

// Accepts upper or lower case. Throws Error(kHexMalformed).
Bytes from_hex(std::string_view text);

template <std::size_t N>
ByteArray<N> fixed_from_hex(std::string_view text);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

inline void append(Bytes& out, ByteView in) { out.insert(out.end(), in.begin(), in.end()); }

template <std::size_t N>
ByteArray<N> fixed_from_hex(std::string_view text) {
  if (text.size() != 2 * N) {
    throw Error(ErrorCode::kHexMalformed,
                "expected " + std::to_string(2 * N) + " hex digits, got " +
                    std::to_string(text.size()));
  }
  Bytes raw = from_hex(text);
  ByteArray<N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

}  // namespace pirax
