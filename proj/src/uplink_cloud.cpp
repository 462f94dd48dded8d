// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/uplink_cloud.hpp"

#include "bsmu/errors.hpp"

#include <algorithm>
#include <charconv>
#include <tuple>

namespace bsmu {

CloudObject CloudStore::store_object(ByteView payload) {
  std::lock_guard lock(mutex_);
  CloudObject obj;
  obj.received_at = next_++;
  obj.object_id = "obj-" + std::to_string(obj.received_at);
  obj.payload.assign(payload.begin(), payload.end());
  obj.checksum = fnv1a64(payload);
  objects_.emplace(obj.object_id, obj);
  return obj;
}

CloudObject CloudStore::fetch(const std::string& object_id) const {
  std::lock_guard lock(mutex_);
  auto it = objects_.find(object_id);
  if (it == objects_.end()) throw NotFound("no cloud object " + object_id);
  return it->second;
}

std::size_t CloudStore::size() const {
  std::lock_guard lock(mutex_);
  return objects_.size();
}

Uplink::Uplink(CloudStore& cloud, std::optional<EnergyParams> params)
    : cloud_(cloud), params_(std::move(params)) {}

TransmissionLog Uplink::transmit(ByteView payload, SensorType sensor, TransmitMode mode) {
  if (!params_ || !params_->calibrated()) {
    throw UncalibratedModel("uplink has no calibrated energy model");
  }
  const CloudObject obj = cloud_.store_object(payload);
  TransmissionLog log;
  log.sensor_type = sensor;
  log.bytes_sent = payload.size();
  log.mode = mode;
  log.energy_charged = energy_for(*params_, mode, sensor, payload.size());
  log.object_id = obj.object_id;
  std::lock_guard lock(mutex_);
  log.timestamp = logs_.size() + 1;
  bytes_[index_of(sensor)][static_cast<std::size_t>(mode)] += payload.size();
  logs_.push_back(log);
  return log;
}

std::vector<TransmissionLog> Uplink::logs() const {
  std::lock_guard lock(mutex_);
  return logs_;
}

std::uint64_t Uplink::cumulative_bytes(SensorType sensor, TransmitMode mode) const {
  std::lock_guard lock(mutex_);
  return bytes_[index_of(sensor)][static_cast<std::size_t>(mode)];
}

double Uplink::cumulative_energy(SensorType sensor, TransmitMode mode) const {
  if (!params_) return 0.0;
  return energy_for(*params_, mode, sensor, cumulative_bytes(sensor, mode));
}

std::string Uplink::export_ledger() const {
  std::string out = "sensor,mode,bytes,energy\n";
  char buf[64];
  for (const TransmissionLog& log : logs()) {
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, log.energy_charged);
    out += std::string(key_name(log.sensor_type)) + ',' + std::string(mode_name(log.mode)) + ',' +
           std::to_string(log.bytes_sent) + ',' + std::string(buf, p) + '\n';
  }
  return out;
}

std::vector<Notification> dispatch_notifications(ByteView dataset, std::int32_t threshold_milli) {
  Dataset d;
  try {
    d = parse_dataset(dataset);
  } catch (const MalformedRecord& e) {
    throw MalformedInput(std::string("notification input: ") + e.what());
  }
  std::vector<Notification> out;
  for (const SensorRecord& r : d.records) {
    if (!r.is_alert() || (r.flags & flags::kSummary)) continue;
    out.push_back({r.device_id, r.sensor_type, r.value_milli, threshold_milli, r.timestamp_ms, r.seq_no});
  }
  std::stable_sort(out.begin(), out.end(), [](const Notification& a, const Notification& b) {
    return std::tie(a.device_id, a.seq_no) < std::tie(b.device_id, b.seq_no);
  });
  return out;
}

}  // namespace bsmu
