// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file bytes.hpp
/// @brief Byte buffers, big-endian field codecs and the FNV-1a 64-bit hash.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bsmu {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// FNV-1a, 64-bit variant (offset basis 0xcbf29ce484222325, prime 0x100000001b3).
std::uint64_t fnv1a64(ByteView data) noexcept;
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Appends `width` bytes of `value` to `out`, most significant byte first.
void put_be(Bytes& out, std::uint64_t value, std::size_t width);

/// Writes `width` bytes of `value` at `dst`, most significant byte first.
void store_be(std::uint8_t* dst, std::uint64_t value, std::size_t width) noexcept;

/// Reads `width` big-endian bytes starting at `src`.
std::uint64_t load_be(const std::uint8_t* src, std::size_t width) noexcept;

/// Sign-extends the low `bits` bits of `raw`.
constexpr std::int64_t sign_extend(std::uint64_t raw, unsigned bits) noexcept {
  const std::uint64_t sign = std::uint64_t{1} << (bits - 1);
  const std::uint64_t mask = bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
  raw &= mask;
  return static_cast<std::int64_t>((raw ^ sign) - sign);
}

inline Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

}  // namespace bsmu
