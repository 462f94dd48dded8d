// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file sensor_ingest.hpp
/// @brief Simulated sensing unit: record wire format, dataset framing and
/// deterministic synthetic dataset generation.
///
/// Record layout (20 bytes, all integers big-endian):
///
///   offset  size  field
///   0       1     sensor type code (0..4)
///   1       1     flags (bit0 alert candidate, bit1 summary)
///   2       2     device id
///   4       4     sequence number
///   8       8     timestamp, ms since epoch
///   16      4     value x 1000, two's complement
///
/// Dataset layout: 16-byte header ("BSMU", version, record count, pad length,
/// 3 reserved zero bytes), then the records, then `pad_len` zero bytes.

#pragma once

#include "bsmu/bytes.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bsmu {

enum class SensorType : std::uint8_t {
  Moisture = 0,
  DieselLevel = 1,
  Smoke = 2,
  Temperature = 3,
  Pressure = 4,
};

inline constexpr std::array<SensorType, 5> kAllSensors = {
    SensorType::Moisture, SensorType::DieselLevel, SensorType::Smoke,
    SensorType::Temperature, SensorType::Pressure};

constexpr std::uint8_t code(SensorType t) noexcept { return static_cast<std::uint8_t>(t); }
constexpr std::size_t index_of(SensorType t) noexcept { return static_cast<std::size_t>(t); }

std::optional<SensorType> sensor_from_code(std::uint8_t c) noexcept;

/// Display name as in the comparison report ("Moisture", "Diesel Level", ...).
std::string_view display_name(SensorType t) noexcept;
/// Lower-case identifier used in config and key/value files ("diesel_level").
std::string_view key_name(SensorType t) noexcept;
/// Accepts either the key name or the display name, case-insensitively.
std::optional<SensorType> sensor_from_name(std::string_view name) noexcept;

namespace flags {
inline constexpr std::uint8_t kAlert = 0x01;
inline constexpr std::uint8_t kSummary = 0x02;
}  // namespace flags

struct SensorRecord {
  SensorType sensor_type = SensorType::Moisture;
  std::uint8_t flags = 0;
  std::uint16_t device_id = 0;
  std::uint32_t seq_no = 0;
  std::uint64_t timestamp_ms = 0;
  std::int32_t value_milli = 0;

  bool is_alert() const noexcept { return (flags & flags::kAlert) != 0; }
  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

inline constexpr std::size_t kRecordSize = 20;
inline constexpr std::size_t kHeaderSize = 16;
inline constexpr std::size_t kMinDatasetBytes = kHeaderSize + kRecordSize;
inline constexpr std::uint8_t kFormatVersion = 1;

std::array<std::uint8_t, kRecordSize> serialize_record(const SensorRecord& record) noexcept;
void append_record(Bytes& out, const SensorRecord& record);

/// @throws MalformedRecord on a wrong length or an unknown sensor code.
SensorRecord deserialize_record(ByteView bytes);

struct SensorSpec {
  SensorType sensor_type = SensorType::Moisture;
  std::uint32_t device_count = 1;
  std::uint64_t sample_period_ms = 1000;
  std::uint64_t start_ms = 0;
  double value_mean = 0.0;
  double value_stddev = 0.0;
  /// Samples strictly above this value carry the alert-candidate flag.
  double alert_threshold = 0.0;
  std::uint64_t seed = 0;

  /// Built-in statistics per sensor; the alert threshold sits at mean + 2 sigma.
  static SensorSpec defaults_for(SensorType t);
};

/// @throws InvalidSpec when a SensorSpec invariant does not hold.
void validate(const SensorSpec& spec);

struct Dataset {
  std::vector<SensorRecord> records;
  std::uint32_t pad_len = 0;

  std::uint64_t size_bytes() const noexcept {
    return kHeaderSize + kRecordSize * records.size() + pad_len;
  }
};

struct DatasetHeader {
  std::uint32_t record_count = 0;
  std::uint32_t pad_len = 0;
};

Bytes serialize_dataset(const Dataset& dataset);

/// Validates and decodes only the 16-byte header.
/// @throws MalformedRecord on bad magic, version, pad length or reserved bytes.
DatasetHeader parse_header(ByteView header);

/// @throws MalformedRecord when the bytes are not a well-formed dataset.
Dataset parse_dataset(ByteView bytes);

/// Generates exactly `target_bytes` bytes of dataset. Values are Gaussian
/// draws from a seeded mt19937_64 stream (Box-Muller on 53-bit uniforms),
/// assigned round-robin to device ids 1..device_count.
/// @throws InvalidTarget if target_bytes < 36.
Dataset generate_dataset(const SensorSpec& spec, std::uint64_t target_bytes);

/// Timestamp of the k-th sample of any device under `spec`.
constexpr std::uint64_t sample_timestamp(const SensorSpec& spec, std::uint64_t k) noexcept {
  return spec.start_ms + k * spec.sample_period_ms;
}

/// Number of records a dataset of `target_bytes` holds.
constexpr std::uint64_t records_for_target(std::uint64_t target_bytes) noexcept {
  return target_bytes < kHeaderSize ? 0 : (target_bytes - kHeaderSize) / kRecordSize;
}

}  // namespace bsmu
