// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file reduction_jobs.hpp
/// @brief Data-reducing jobs: per-window aggregation, threshold filtering, and
/// the planner that sizes a window so a dataset shrinks to a byte target.

#pragma once

#include "bsmu/blockstore.hpp"
#include "bsmu/mapreduce.hpp"
#include "bsmu/sensor_ingest.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace bsmu {

enum Statistic : std::uint8_t {
  kCount = 0x10,
  kMin = 0x20,
  kMax = 0x40,
  kMean = 0x80,
  kAllStatistics = kCount | kMin | kMax | kMean,
};

struct WindowAggSpec {
  std::uint64_t window_ms = 1000;
  /// Bitwise OR of Statistic values; at least one.
  std::uint8_t statistics = kAllStatistics;
  std::uint32_t partition_count = 4;
  /// Optional exact output size (see JobSpec::pad_output_to).
  std::optional<std::uint64_t> pad_output_to;
};

/// One aggregated window. Encoded in the 20-byte record frame:
///
///   offset  size  field
///   0       1     sensor type code
///   1       1     flags: bit1 summary, bits4..7 statistics present
///   2       2     device id
///   4       4     window index (window_start_ms / window_ms)
///   8       3     count, unsigned
///   11      3     min x 1000, signed
///   14      3     max x 1000, signed
///   17      3     mean x 1000 (floor), signed
///
/// Statistics not selected are encoded as zero.
struct SummaryRecord {
  SensorType sensor_type = SensorType::Moisture;
  std::uint8_t statistics = kAllStatistics;
  std::uint16_t device_id = 0;
  std::uint64_t window_start_ms = 0;
  std::uint32_t count = 0;
  std::int32_t min_milli = 0;
  std::int32_t max_milli = 0;
  std::int32_t mean_milli = 0;

  friend bool operator==(const SummaryRecord&, const SummaryRecord&) = default;
};

inline constexpr std::int32_t kSummaryValueMax = (1 << 23) - 1;
inline constexpr std::int32_t kSummaryValueMin = -(1 << 23);
inline constexpr std::uint32_t kSummaryCountMax = (1u << 24) - 1;

/// @throws std::range_error when a field does not fit its encoded width or
/// window_start_ms is not a multiple of window_ms.
Bytes encode_summary(const SummaryRecord& summary, std::uint64_t window_ms);
/// @throws MalformedRecord when the bytes are not a summary record.
SummaryRecord decode_summary(ByteView bytes, std::uint64_t window_ms);
bool is_summary(const SensorRecord& record) noexcept;

/// floor(sum / count), rounding toward negative infinity.
std::int64_t floor_div(std::int64_t sum, std::int64_t count) noexcept;

/// Groups by (sensor, device, floor(timestamp / window)). Ships a combiner
/// that merges partial (count, sum, min, max) aggregates.
/// @throws InvalidSpec when window_ms is 0 or no statistic is selected.
JobSpec window_aggregate_job(const WindowAggSpec& spec, bool use_combiner = true);

/// Keeps records with value > threshold (keep_above) or value < threshold
/// (otherwise) and marks each kept record as an alert. Output is keyed by
/// (sensor, device, seq) on a single partition, so it is fully key-sorted.
JobSpec semantic_filter_job(std::int32_t threshold_milli, bool keep_above);

/// Per (sensor, device), keeps the first record and then each record whose
/// value differs from the last kept one by at least `min_delta_milli`.
/// A delta of 1 drops exact repeats. Records are visited in input order.
/// @throws InvalidSpec when min_delta_milli < 0.
JobSpec delta_suppression_job(std::int64_t min_delta_milli, std::uint32_t partition_count = 1);

/// Re-emits every record unchanged, keyed by (sensor, device, seq).
JobSpec passthrough_job(std::uint32_t partition_count = 1);

struct ReductionPlan {
  SensorType sensor_type = SensorType::Moisture;
  std::uint64_t before_bytes = 0;
  std::uint64_t target_after_bytes = 0;
  /// Empty for the identity chain.
  std::optional<WindowAggSpec> aggregate;
  std::int32_t alert_threshold_milli = 0;
  std::uint64_t expected_records = 0;
  std::uint64_t expected_after_bytes = 0;
  /// True when the target is below one summary record plus header.
  bool degraded = false;
  std::string note;
};

/// Picks window_ms so the aggregate of generate_dataset(spec, before_bytes)
/// holds floor((after_bytes - 16) / 20) summaries, padded up to after_bytes.
/// Timestamps do not depend on values, so the summary count per window size
/// is computed exactly without generating data.
/// @throws InvalidSizes when after_bytes > before_bytes; InvalidTarget when
/// before_bytes < 36.
ReductionPlan plan_for_table3(SensorType sensor_type, std::uint64_t before_bytes,
                              std::uint64_t after_bytes, const SensorSpec& spec);

/// Summaries the aggregate job emits for generate_dataset(spec, before_bytes).
std::uint64_t predicted_summary_count(const SensorSpec& spec, std::uint64_t before_bytes,
                                      std::uint64_t window_ms);

struct PlanOutcome {
  std::string output_path;
  std::uint64_t after_bytes = 0;
  std::optional<JobResult> aggregate;
  std::string alert_path;
  JobResult alerts;
};

/// Runs the plan's chain over `input_path`: the alert filter (its output feeds
/// notifications) and the window aggregate (its output is the reduced payload).
PlanOutcome execute_plan(BlockStore& store, const ReductionPlan& plan, const std::string& input_path,
                         std::uint32_t worker_count = 1);

/// after / before. @throws InvalidSizes unless 0 < before and after <= before.
double reduction_ratio(std::uint64_t before_bytes, std::uint64_t after_bytes);

}  // namespace bsmu
