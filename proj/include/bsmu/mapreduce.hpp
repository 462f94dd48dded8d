// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file mapreduce.hpp
/// @brief Deterministic map/combine/shuffle/reduce over block-stored datasets.
///
/// Execution contract (byte-reproducible for any worker count):
///  - one map task per input block; a record belongs to the block holding its
///    first byte, and records straddling a block edge are read across it;
///  - keys go to partition fnv1a64(key) % partition_count;
///  - within a partition, reducer calls run in ascending byte-lexicographic
///    key order, and each value list is ordered by (split, record index);
///  - job output is the concatenation of partitions in index order.

#pragma once

#include "bsmu/blockstore.hpp"
#include "bsmu/bytes.hpp"
#include "bsmu/sensor_ingest.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bsmu {

struct KeyValue {
  Bytes key;
  Bytes value;

  friend bool operator==(const KeyValue&, const KeyValue&) = default;
};

using Mapper = std::function<std::vector<KeyValue>(const SensorRecord&)>;
using Combiner = std::function<std::vector<Bytes>(const Bytes& key, const std::vector<Bytes>& values)>;
using Reducer = std::function<std::vector<Bytes>(const Bytes& key, const std::vector<Bytes>& values)>;

enum class OutputFraming {
  /// Reducer outputs concatenated as-is.
  Raw,
  /// Reducer outputs must be 20-byte records; wrapped in a dataset header.
  Dataset,
};

/// Mapper, combiner and reducer must be pure functions of their arguments.
struct JobSpec {
  std::string job_name;
  Mapper mapper;
  /// Optional. Applied per map task; must not change the job's output.
  Combiner combiner;
  Reducer reducer;
  std::uint32_t partition_count = 1;
  OutputFraming framing = OutputFraming::Raw;
  /// Dataset framing only: zero-pad the output up to this size when the gap
  /// is smaller than one record.
  std::optional<std::uint64_t> pad_output_to;
};

struct JobCounters {
  std::uint64_t map_input_records = 0;
  std::uint64_t map_output_records = 0;
  std::uint64_t map_output_bytes = 0;
  std::uint64_t reduce_input_groups = 0;
  std::uint64_t reduce_input_records = 0;
  std::uint64_t reduce_output_records = 0;
  std::uint64_t input_read_bytes = 0;
  std::uint64_t system_read_bytes = 0;
  std::uint64_t system_write_bytes = 0;
  std::uint64_t output_write_bytes = 0;

  friend bool operator==(const JobCounters&, const JobCounters&) = default;
};

struct PhaseTimes {
  double map_ms = 0.0;
  double shuffle_ms = 0.0;
  double reduce_ms = 0.0;

  double total_ms() const noexcept { return map_ms + shuffle_ms + reduce_ms; }
};

struct JobResult {
  std::string output_path;
  JobCounters counters;
  PhaseTimes elapsed_ms;
  std::uint64_t map_tasks = 0;
  /// Pairs routed to each partition by the shuffle.
  std::vector<std::uint64_t> shuffled_pairs;
};

struct RunOptions {
  std::uint32_t worker_count = 1;
  /// Defaults to `<input_path>.<job_name>.out`. An existing path is replaced.
  std::string output_path;
};

/// Each intermediate pair is spilled as `u32 key_len, key, u32 value_len, value`.
inline constexpr std::uint64_t kSpillFrameOverhead = 8;

/// FNV-1a 64 of `key`, modulo `partition_count` (treated as 1 if 0).
std::uint32_t partition(ByteView key, std::uint32_t partition_count) noexcept;

/// @throws MalformedInput, JobFailure, NotFound
JobResult run_job(BlockStore& store, const JobSpec& job, const std::string& input_path,
                  const RunOptions& options = {});

/// Single-threaded in-memory reference for run_job. Ignores the combiner, so
/// it matches run_job only for combiners that preserve job output. Test oracle.
/// @throws MalformedInput, JobFailure, NotFound
Bytes run_sequential_oracle(const BlockStore& store, const JobSpec& job, const std::string& input_path);

/// Applies `job.framing` to concatenated reducer outputs.
/// @throws JobFailure when dataset framing receives a non-record output.
Bytes frame_job_output(const JobSpec& job, const std::vector<Bytes>& outputs);

}  // namespace bsmu
