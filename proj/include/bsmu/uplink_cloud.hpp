// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file uplink_cloud.hpp
/// @brief Lossless simulated uplink to a cloud object sink, per-transmission
/// energy charging, and alert notifications back toward devices.

#pragma once

#include "bsmu/bytes.hpp"
#include "bsmu/energy_model.hpp"
#include "bsmu/sensor_ingest.hpp"

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bsmu {

struct CloudObject {
  std::string object_id;
  Bytes payload;
  std::uint64_t checksum = 0;
  /// Logical receive order, starting at 1.
  std::uint64_t received_at = 0;
};

/// Thread-safe object registry. Object ids are `obj-<n>` with n increasing.
class CloudStore {
 public:
  CloudObject store_object(ByteView payload);
  /// @throws NotFound
  CloudObject fetch(const std::string& object_id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, CloudObject> objects_;
  std::uint64_t next_ = 1;
};

struct TransmissionLog {
  SensorType sensor_type = SensorType::Moisture;
  std::uint64_t bytes_sent = 0;
  TransmitMode mode = TransmitMode::Traditional;
  double energy_charged = 0.0;
  /// Logical transmission order, starting at 1.
  std::uint64_t timestamp = 0;
  std::string object_id;
};

/// Channel from the base station to the cloud. transmit() may be called from
/// several threads; the ledger serialises updates.
class Uplink {
 public:
  Uplink(CloudStore& cloud, std::optional<EnergyParams> params);

  /// Charges energy for `payload`, delivers it to the cloud unchanged and
  /// appends to the ledger. @throws UncalibratedModel
  TransmissionLog transmit(ByteView payload, SensorType sensor, TransmitMode mode);

  std::vector<TransmissionLog> logs() const;

  /// Cumulative energy for (sensor, mode). Tracked as total bytes so the
  /// result does not depend on call interleaving.
  double cumulative_energy(SensorType sensor, TransmitMode mode) const;
  std::uint64_t cumulative_bytes(SensorType sensor, TransmitMode mode) const;

  /// `sensor,mode,bytes,energy` header plus one line per transmission.
  std::string export_ledger() const;

 private:
  CloudStore& cloud_;
  std::optional<EnergyParams> params_;
  mutable std::mutex mutex_;
  std::vector<TransmissionLog> logs_;
  std::array<std::array<std::uint64_t, 2>, 5> bytes_{};
};

struct Notification {
  std::uint16_t device_id = 0;
  SensorType sensor_type = SensorType::Moisture;
  std::int32_t value_milli = 0;
  std::int32_t threshold_milli = 0;
  /// Timestamp of the sample that raised the alert.
  std::uint64_t issued_at = 0;
  std::uint32_t seq_no = 0;

  friend bool operator==(const Notification&, const Notification&) = default;
};

/// One notification per alert-flagged, non-summary record of a dataset,
/// ordered by (device id, seq). @throws MalformedInput
std::vector<Notification> dispatch_notifications(ByteView dataset, std::int32_t threshold_milli);

}  // namespace bsmu
