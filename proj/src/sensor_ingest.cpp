// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/sensor_ingest.hpp"

#include "bsmu/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace bsmu {

namespace {

constexpr std::array<std::string_view, 5> kDisplayNames = {
    "Moisture", "Diesel Level", "Smoke", "Temperature", "Pressure"};
constexpr std::array<std::string_view, 5> kKeyNames = {
    "moisture", "diesel_level", "smoke", "temperature", "pressure"};
constexpr std::array<std::uint8_t, 4> kMagic = {'B', 'S', 'M', 'U'};

bool iequals_loose(std::string_view a, std::string_view b) {
  // Treats ' ', '_' and '-' as the same separator.
  auto norm = [](char c) {
    if (c == ' ' || c == '-') return '_';
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  };
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(),
                    [&](char x, char y) { return norm(x) == norm(y); });
}

// Standard normal variates from a fixed engine. std::normal_distribution is
// implementation-defined, so the transform is spelled out here.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool cached_ = false;
};

std::int32_t to_milli(double value) {
  const double scaled = std::round(value * 1000.0);
  constexpr double lo = std::numeric_limits<std::int32_t>::min();
  constexpr double hi = std::numeric_limits<std::int32_t>::max();
  return static_cast<std::int32_t>(std::clamp(scaled, lo, hi));
}

}  // namespace

std::optional<SensorType> sensor_from_code(std::uint8_t c) noexcept {
  if (c < kAllSensors.size()) return static_cast<SensorType>(c);
  return std::nullopt;
}

std::string_view display_name(SensorType t) noexcept { return kDisplayNames[index_of(t)]; }
std::string_view key_name(SensorType t) noexcept { return kKeyNames[index_of(t)]; }

std::optional<SensorType> sensor_from_name(std::string_view name) noexcept {
  for (SensorType t : kAllSensors) {
    if (iequals_loose(name, key_name(t)) || iequals_loose(name, display_name(t))) return t;
  }
  if (iequals_loose(name, "diesel")) return SensorType::DieselLevel;
  return std::nullopt;
}

std::array<std::uint8_t, kRecordSize> serialize_record(const SensorRecord& r) noexcept {
  std::array<std::uint8_t, kRecordSize> out{};
  out[0] = code(r.sensor_type);
  out[1] = r.flags;
  store_be(&out[2], r.device_id, 2);
  store_be(&out[4], r.seq_no, 4);
  store_be(&out[8], r.timestamp_ms, 8);
  store_be(&out[16], static_cast<std::uint32_t>(r.value_milli), 4);
  return out;
}

void append_record(Bytes& out, const SensorRecord& record) {
  const auto raw = serialize_record(record);
  out.insert(out.end(), raw.begin(), raw.end());
}

SensorRecord deserialize_record(ByteView bytes) {
  if (bytes.size() != kRecordSize) {
    throw MalformedRecord("record must be 20 bytes, got " + std::to_string(bytes.size()));
  }
  const auto type = sensor_from_code(bytes[0]);
  if (!type) throw MalformedRecord("unknown sensor code " + std::to_string(bytes[0]));
  SensorRecord r;
  r.sensor_type = *type;
  r.flags = bytes[1];
  r.device_id = static_cast<std::uint16_t>(load_be(&bytes[2], 2));
  r.seq_no = static_cast<std::uint32_t>(load_be(&bytes[4], 4));
  r.timestamp_ms = load_be(&bytes[8], 8);
  r.value_milli = static_cast<std::int32_t>(sign_extend(load_be(&bytes[16], 4), 32));
  return r;
}

SensorSpec SensorSpec::defaults_for(SensorType t) {
  SensorSpec s;
  s.sensor_type = t;
  switch (t) {
    case SensorType::Moisture: s.value_mean = 40.0; s.value_stddev = 5.0; break;
    case SensorType::DieselLevel: s.value_mean = 60.0; s.value_stddev = 10.0; break;
    case SensorType::Smoke: s.value_mean = 50.0; s.value_stddev = 30.0; break;
    case SensorType::Temperature: s.value_mean = 25.0; s.value_stddev = 4.0; break;
    case SensorType::Pressure: s.value_mean = 101.3; s.value_stddev = 1.0; break;
  }
  s.alert_threshold = s.value_mean + 2.0 * s.value_stddev;
  s.seed = 0x42534d55ULL + code(t);
  return s;
}

void validate(const SensorSpec& spec) {
  if (spec.device_count < 1 || spec.device_count > 0xffff) {
    throw InvalidSpec("device_count must be in 1..65535");
  }
  if (spec.sample_period_ms < 1) throw InvalidSpec("sample_period_ms must be >= 1");
  if (!(spec.value_stddev >= 0.0)) throw InvalidSpec("value_stddev must be >= 0");
  if (!std::isfinite(spec.value_mean) || !std::isfinite(spec.value_stddev)) {
    throw InvalidSpec("value statistics must be finite");
  }
}

Bytes serialize_dataset(const Dataset& dataset) {
  Bytes out(dataset.size_bytes(), 0);
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = kFormatVersion;
  store_be(&out[5], dataset.records.size(), 4);
  store_be(&out[9], dataset.pad_len, 4);
  std::size_t offset = kHeaderSize;
  for (const auto& r : dataset.records) {
    const auto raw = serialize_record(r);
    std::copy(raw.begin(), raw.end(), out.begin() + static_cast<std::ptrdiff_t>(offset));
    offset += kRecordSize;
  }
  return out;
}

DatasetHeader parse_header(ByteView header) {
  if (header.size() < kHeaderSize) throw MalformedRecord("dataset shorter than its header");
  if (!std::equal(kMagic.begin(), kMagic.end(), header.begin())) {
    throw MalformedRecord("bad dataset magic");
  }
  if (header[4] != kFormatVersion) {
    throw MalformedRecord("unsupported dataset version " + std::to_string(header[4]));
  }
  DatasetHeader h;
  h.record_count = static_cast<std::uint32_t>(load_be(&header[5], 4));
  h.pad_len = static_cast<std::uint32_t>(load_be(&header[9], 4));
  if (h.pad_len >= kRecordSize) throw MalformedRecord("pad_len must be < 20");
  if (header[13] != 0 || header[14] != 0 || header[15] != 0) {
    throw MalformedRecord("reserved header bytes must be zero");
  }
  return h;
}

Dataset parse_dataset(ByteView bytes) {
  const DatasetHeader h = parse_header(bytes);
  const std::uint64_t expected =
      kHeaderSize + std::uint64_t{kRecordSize} * h.record_count + h.pad_len;
  if (bytes.size() != expected) {
    throw MalformedRecord("dataset size " + std::to_string(bytes.size()) +
                          " does not match header (expected " + std::to_string(expected) + ")");
  }
  Dataset d;
  d.pad_len = h.pad_len;
  d.records.reserve(h.record_count);
  for (std::uint32_t i = 0; i < h.record_count; ++i) {
    d.records.push_back(deserialize_record(bytes.subspan(kHeaderSize + kRecordSize * i, kRecordSize)));
  }
  const auto pad = bytes.subspan(bytes.size() - h.pad_len);
  if (std::any_of(pad.begin(), pad.end(), [](std::uint8_t b) { return b != 0; })) {
    throw MalformedRecord("pad bytes must be zero");
  }
  return d;
}

Dataset generate_dataset(const SensorSpec& spec, std::uint64_t target_bytes) {
  if (target_bytes < kMinDatasetBytes) {
    throw InvalidTarget("target_bytes must be >= 36, got " + std::to_string(target_bytes));
  }
  validate(spec);
  const std::uint64_t count = records_for_target(target_bytes);
  if (count > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidTarget("target_bytes exceeds the 32-bit record count");
  }

  Dataset d;
  d.pad_len = static_cast<std::uint32_t>(target_bytes - kHeaderSize - kRecordSize * count);
  d.records.reserve(count);
  GaussianStream gauss(spec.seed);
  const std::int32_t alert_milli = to_milli(spec.alert_threshold);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t k = i / spec.device_count;
    SensorRecord r;
    r.sensor_type = spec.sensor_type;
    r.device_id = static_cast<std::uint16_t>(1 + i % spec.device_count);
    r.seq_no = static_cast<std::uint32_t>(k);
    r.timestamp_ms = sample_timestamp(spec, k);
    r.value_milli = to_milli(spec.value_mean + spec.value_stddev * gauss.next());
    if (r.value_milli > alert_milli) r.flags |= flags::kAlert;
    d.records.push_back(r);
  }
  return d;
}

}  // namespace bsmu
