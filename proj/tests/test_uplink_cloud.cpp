// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/errors.hpp"
#include "bsmu/uplink_cloud.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <thread>

namespace bsmu {
namespace {

EnergyParams params() { return calibrate(default_calibration_rows()); }

TEST(Uplink, ChargesCalibratedEnergy) {
  CloudStore cloud;
  Uplink up(cloud, params());
  const auto a = up.transmit(Bytes(5000, 1), SensorType::Moisture, TransmitMode::Traditional);
  EXPECT_NEAR(a.energy_charged, 7.99e-3, 1e-15);
  EXPECT_EQ(a.bytes_sent, 5000u);
  EXPECT_EQ(a.timestamp, 1u);
  const auto b = up.transmit(Bytes(500, 1), SensorType::Moisture, TransmitMode::Proposed);
  EXPECT_NEAR(b.energy_charged, 0.21e-3, 1e-15);
  EXPECT_EQ(b.timestamp, 2u);
  EXPECT_NE(a.object_id, b.object_id);
  EXPECT_EQ(cloud.size(), 2u);
}

TEST(Uplink, EmptyPayloadCostsNothing) {
  CloudStore cloud;
  Uplink up(cloud, params());
  const auto log = up.transmit(Bytes{}, SensorType::Smoke, TransmitMode::Proposed);
  EXPECT_EQ(log.energy_charged, 0.0);
  EXPECT_EQ(log.bytes_sent, 0u);
  EXPECT_TRUE(cloud.fetch(log.object_id).payload.empty());
}

TEST(Uplink, RequiresCalibration) {
  CloudStore cloud;
  Uplink none(cloud, std::nullopt);
  EXPECT_THROW(none.transmit(Bytes(3, 0), SensorType::Smoke, TransmitMode::Proposed), UncalibratedModel);
  Uplink blank(cloud, EnergyParams{});
  EXPECT_THROW(blank.transmit(Bytes(3, 0), SensorType::Smoke, TransmitMode::Proposed), UncalibratedModel);
  EXPECT_EQ(cloud.size(), 0u);
}

TEST(CloudStore, RoundTripAndIds) {
  CloudStore cloud;
  std::mt19937_64 rng(2);
  std::set<std::string> ids;
  for (int i = 0; i < 50; ++i) {
    Bytes payload(rng() % 3000);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    const CloudObject o = cloud.store_object(payload);
    EXPECT_TRUE(ids.insert(o.object_id).second);
    const CloudObject back = cloud.fetch(o.object_id);
    EXPECT_EQ(back.payload, payload);
    EXPECT_EQ(back.checksum, testing::reference_fnv1a64(payload));
    EXPECT_EQ(back.received_at, static_cast<std::uint64_t>(i + 1));
  }
  EXPECT_EQ(*ids.begin(), "obj-1");
  EXPECT_THROW(cloud.fetch("obj-999"), NotFound);
}

TEST(Uplink, ConcurrentLedgerIsConsistent) {
  CloudStore cloud;
  const EnergyParams p = params();
  Uplink up(cloud, p);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&up, t] {
        for (int i = 0; i < 100; ++i) {
          const auto sensor = static_cast<SensorType>((t + i) % 5);
          const auto mode = i % 2 ? TransmitMode::Proposed : TransmitMode::Traditional;
          up.transmit(Bytes(static_cast<std::size_t>(10 + t + i), 0), sensor, mode);
        }
      });
    }
  }
  const auto logs = up.logs();
  ASSERT_EQ(logs.size(), 800u);
  std::set<std::uint64_t> stamps;
  std::array<std::array<std::uint64_t, 2>, 5> bytes{};
  for (const auto& l : logs) {
    stamps.insert(l.timestamp);
    bytes[index_of(l.sensor_type)][l.mode == TransmitMode::Proposed] += l.bytes_sent;
  }
  EXPECT_EQ(stamps.size(), 800u);
  EXPECT_EQ(*stamps.rbegin(), 800u);
  EXPECT_EQ(cloud.size(), 800u);
  for (SensorType s : kAllSensors) {
    for (TransmitMode m : {TransmitMode::Traditional, TransmitMode::Proposed}) {
      const auto b = bytes[index_of(s)][m == TransmitMode::Proposed];
      EXPECT_EQ(up.cumulative_bytes(s, m), b);
      EXPECT_DOUBLE_EQ(up.cumulative_energy(s, m), energy_for(p, m, s, b));
    }
  }
}

TEST(Uplink, LedgerExport) {
  CloudStore cloud;
  Uplink up(cloud, params());
  up.transmit(Bytes(5000, 0), SensorType::Moisture, TransmitMode::Traditional);
  up.transmit(Bytes(478, 0), SensorType::Smoke, TransmitMode::Proposed);
  const std::string csv = up.export_ledger();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sensor,mode,bytes,energy");
  EXPECT_NE(csv.find(",traditional,5000,"), std::string::npos);
  EXPECT_NE(csv.find(",proposed,478,"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

Dataset smoke_with_alerts(const std::vector<std::pair<std::uint16_t, std::uint32_t>>& flagged,
                          std::size_t total) {
  Dataset d;
  for (std::size_t i = 0; i < total; ++i) {
    d.records.push_back({SensorType::Smoke, 0, static_cast<std::uint16_t>(1 + i % 3),
                         static_cast<std::uint32_t>(i / 3), 1000 * i, static_cast<std::int32_t>(i)});
  }
  for (auto [dev, seq] : flagged) {
    for (SensorRecord& r : d.records) {
      if (r.device_id == dev && r.seq_no == seq) {
        r.flags |= flags::kAlert;
        r.value_milli = 200000 + static_cast<std::int32_t>(seq);
      }
    }
  }
  return d;
}

TEST(Notifications, NoFlagsNoNotifications) {
  EXPECT_TRUE(dispatch_notifications(serialize_dataset(smoke_with_alerts({}, 30)), 110000).empty());
  EXPECT_TRUE(dispatch_notifications(serialize_dataset(Dataset{}), 0).empty());
}

TEST(Notifications, FlaggedRecordsInDeviceSeqOrder) {
  const Dataset d = smoke_with_alerts({{3, 2}, {1, 5}, {1, 1}}, 30);
  const auto n = dispatch_notifications(serialize_dataset(d), 110000);
  ASSERT_EQ(n.size(), 3u);
  EXPECT_EQ(n[0].device_id, 1);
  EXPECT_EQ(n[0].seq_no, 1u);
  EXPECT_EQ(n[1].device_id, 1);
  EXPECT_EQ(n[1].seq_no, 5u);
  EXPECT_EQ(n[2].device_id, 3);
  EXPECT_EQ(n[2].seq_no, 2u);
  for (const auto& x : n) {
    EXPECT_EQ(x.sensor_type, SensorType::Smoke);
    EXPECT_EQ(x.threshold_milli, 110000);
    EXPECT_EQ(x.value_milli, 200000 + static_cast<std::int32_t>(x.seq_no));
  }
  EXPECT_EQ(n[0].issued_at, 1000u * (1 * 3 + 0));
}

TEST(Notifications, AllFlaggedAndSummariesSkipped) {
  Dataset d = smoke_with_alerts({}, 40);
  for (auto& r : d.records) r.flags |= flags::kAlert;
  EXPECT_EQ(dispatch_notifications(serialize_dataset(d), 0).size(), 40u);
  d.records[0].flags |= flags::kSummary;
  EXPECT_EQ(dispatch_notifications(serialize_dataset(d), 0).size(), 39u);
  EXPECT_THROW(dispatch_notifications(Bytes(5, 0), 0), MalformedInput);
}

}  // namespace
}  // namespace bsmu
