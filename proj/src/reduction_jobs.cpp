// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/reduction_jobs.hpp"

#include "bsmu/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bsmu {

namespace {

constexpr std::uint8_t kStatsMask = 0xf0;

// Partial aggregate carried between mapper, combiner and reducer:
// count u32 | sum i64 | min i32 | max i32.
struct Partial {
  std::uint64_t count = 0;
  std::int64_t sum = 0;
  std::int32_t min = std::numeric_limits<std::int32_t>::max();
  std::int32_t max = std::numeric_limits<std::int32_t>::min();

  void merge(const Partial& o) {
    count += o.count;
    sum += o.sum;
    min = std::min(min, o.min);
    max = std::max(max, o.max);
  }

  Bytes encode() const {
    Bytes out;
    out.reserve(20);
    put_be(out, count, 4);
    put_be(out, static_cast<std::uint64_t>(sum), 8);
    put_be(out, static_cast<std::uint32_t>(min), 4);
    put_be(out, static_cast<std::uint32_t>(max), 4);
    return out;
  }

  static Partial decode(const Bytes& b) {
    if (b.size() != 20) throw std::invalid_argument("partial aggregate must be 20 bytes");
    Partial p;
    p.count = load_be(&b[0], 4);
    p.sum = static_cast<std::int64_t>(load_be(&b[4], 8));
    p.min = static_cast<std::int32_t>(sign_extend(load_be(&b[12], 4), 32));
    p.max = static_cast<std::int32_t>(sign_extend(load_be(&b[16], 4), 32));
    return p;
  }
};

Partial merge_all(const std::vector<Bytes>& values) {
  Partial acc;
  for (const Bytes& v : values) acc.merge(Partial::decode(v));
  return acc;
}

Bytes record_key(const SensorRecord& r) {
  Bytes key;
  key.reserve(7);
  key.push_back(code(r.sensor_type));
  put_be(key, r.device_id, 2);
  put_be(key, r.seq_no, 4);
  return key;
}

Bytes record_bytes(const SensorRecord& r) {
  const auto raw = serialize_record(r);
  return Bytes(raw.begin(), raw.end());
}

std::vector<Bytes> emit_values(const Bytes&, const std::vector<Bytes>& values) { return values; }

void store_signed24(std::uint8_t* dst, std::int32_t v) {
  if (v < kSummaryValueMin || v > kSummaryValueMax) {
    throw std::range_error("summary value " + std::to_string(v) + " exceeds 24-bit range");
  }
  store_be(dst, static_cast<std::uint32_t>(v) & 0xffffff, 3);
}

}  // namespace

std::int64_t floor_div(std::int64_t sum, std::int64_t count) noexcept {
  std::int64_t q = sum / count;
  if ((sum % count != 0) && ((sum < 0) != (count < 0))) --q;
  return q;
}

bool is_summary(const SensorRecord& record) noexcept { return (record.flags & flags::kSummary) != 0; }

Bytes encode_summary(const SummaryRecord& s, std::uint64_t window_ms) {
  if (window_ms == 0 || s.window_start_ms % window_ms != 0) {
    throw std::range_error("window_start_ms is not aligned to window_ms");
  }
  const std::uint64_t window = s.window_start_ms / window_ms;
  if (window > std::numeric_limits<std::uint32_t>::max()) {
    throw std::range_error("window index exceeds 32 bits");
  }
  if (s.count > kSummaryCountMax) throw std::range_error("summary count exceeds 24 bits");
  Bytes out(kRecordSize, 0);
  out[0] = code(s.sensor_type);
  out[1] = static_cast<std::uint8_t>(flags::kSummary | (s.statistics & kStatsMask));
  store_be(&out[2], s.device_id, 2);
  store_be(&out[4], window, 4);
  store_be(&out[8], s.statistics & kCount ? s.count : 0, 3);
  store_signed24(&out[11], s.statistics & kMin ? s.min_milli : 0);
  store_signed24(&out[14], s.statistics & kMax ? s.max_milli : 0);
  store_signed24(&out[17], s.statistics & kMean ? s.mean_milli : 0);
  return out;
}

SummaryRecord decode_summary(ByteView bytes, std::uint64_t window_ms) {
  if (bytes.size() != kRecordSize) throw MalformedRecord("summary must be 20 bytes");
  const auto type = sensor_from_code(bytes[0]);
  if (!type) throw MalformedRecord("unknown sensor code " + std::to_string(bytes[0]));
  if (!(bytes[1] & flags::kSummary)) throw MalformedRecord("record is not a summary");
  SummaryRecord s;
  s.sensor_type = *type;
  s.statistics = bytes[1] & kStatsMask;
  s.device_id = static_cast<std::uint16_t>(load_be(&bytes[2], 2));
  s.window_start_ms = load_be(&bytes[4], 4) * window_ms;
  s.count = static_cast<std::uint32_t>(load_be(&bytes[8], 3));
  s.min_milli = static_cast<std::int32_t>(sign_extend(load_be(&bytes[11], 3), 24));
  s.max_milli = static_cast<std::int32_t>(sign_extend(load_be(&bytes[14], 3), 24));
  s.mean_milli = static_cast<std::int32_t>(sign_extend(load_be(&bytes[17], 3), 24));
  return s;
}

JobSpec window_aggregate_job(const WindowAggSpec& spec, bool use_combiner) {
  if (spec.window_ms == 0) throw InvalidSpec("window_ms must be >= 1");
  if ((spec.statistics & kStatsMask) == 0) throw InvalidSpec("select at least one statistic");
  const std::uint64_t window_ms = spec.window_ms;
  const std::uint8_t stats = spec.statistics & kStatsMask;

  JobSpec job;
  job.job_name = "window_aggregate";
  job.partition_count = spec.partition_count;
  job.framing = OutputFraming::Dataset;
  job.pad_output_to = spec.pad_output_to;
  job.mapper = [window_ms](const SensorRecord& r) {
    Bytes key;
    key.reserve(11);
    key.push_back(code(r.sensor_type));
    put_be(key, r.device_id, 2);
    put_be(key, r.timestamp_ms / window_ms, 8);
    Partial p{1, r.value_milli, r.value_milli, r.value_milli};
    return std::vector<KeyValue>{{std::move(key), p.encode()}};
  };
  if (use_combiner) {
    job.combiner = [](const Bytes&, const std::vector<Bytes>& values) {
      return std::vector<Bytes>{merge_all(values).encode()};
    };
  }
  job.reducer = [window_ms, stats](const Bytes& key, const std::vector<Bytes>& values) {
    const Partial acc = merge_all(values);
    SummaryRecord s;
    s.sensor_type = *sensor_from_code(key[0]);
    s.statistics = stats;
    s.device_id = static_cast<std::uint16_t>(load_be(&key[1], 2));
    s.window_start_ms = load_be(&key[3], 8) * window_ms;
    s.count = static_cast<std::uint32_t>(acc.count);
    s.min_milli = acc.min;
    s.max_milli = acc.max;
    s.mean_milli = static_cast<std::int32_t>(floor_div(acc.sum, static_cast<std::int64_t>(acc.count)));
    if (acc.count > kSummaryCountMax) throw std::range_error("window holds more than 2^24-1 samples");
    return std::vector<Bytes>{encode_summary(s, window_ms)};
  };
  return job;
}

JobSpec semantic_filter_job(std::int32_t threshold_milli, bool keep_above) {
  JobSpec job;
  job.job_name = keep_above ? "filter_above" : "filter_below";
  job.partition_count = 1;
  job.framing = OutputFraming::Dataset;
  job.mapper = [threshold_milli, keep_above](const SensorRecord& r) {
    std::vector<KeyValue> out;
    const bool keep = keep_above ? r.value_milli > threshold_milli : r.value_milli < threshold_milli;
    if (keep) {
      SensorRecord flagged = r;
      flagged.flags |= flags::kAlert;
      out.push_back({record_key(r), record_bytes(flagged)});
    }
    return out;
  };
  job.reducer = emit_values;
  return job;
}

JobSpec delta_suppression_job(std::int64_t min_delta_milli, std::uint32_t partition_count) {
  if (min_delta_milli < 0) throw InvalidSpec("min_delta_milli must be >= 0");
  JobSpec job;
  job.job_name = "delta_suppression";
  job.partition_count = partition_count;
  job.framing = OutputFraming::Dataset;
  job.mapper = [](const SensorRecord& r) {
    Bytes key{code(r.sensor_type)};
    put_be(key, r.device_id, 2);
    return std::vector<KeyValue>{{std::move(key), record_bytes(r)}};
  };
  job.reducer = [min_delta_milli](const Bytes&, const std::vector<Bytes>& values) {
    std::vector<Bytes> kept;
    std::int64_t last = 0;
    for (const Bytes& v : values) {
      const std::int64_t value = deserialize_record(v).value_milli;
      if (kept.empty() || std::abs(value - last) >= min_delta_milli) {
        kept.push_back(v);
        last = value;
      }
    }
    return kept;
  };
  return job;
}

JobSpec passthrough_job(std::uint32_t partition_count) {
  JobSpec job;
  job.job_name = "passthrough";
  job.partition_count = partition_count;
  job.framing = OutputFraming::Dataset;
  job.mapper = [](const SensorRecord& r) {
    return std::vector<KeyValue>{{record_key(r), record_bytes(r)}};
  };
  job.reducer = emit_values;
  return job;
}

std::uint64_t predicted_summary_count(const SensorSpec& spec, std::uint64_t before_bytes,
                                      std::uint64_t window_ms) {
  const std::uint64_t n = records_for_target(before_bytes);
  const std::uint64_t devices = spec.device_count;
  std::uint64_t total = 0;
  for (std::uint64_t d = 0; d < std::min(devices, n); ++d) {
    const std::uint64_t samples = n / devices + (d < n % devices ? 1 : 0);
    if (window_ms <= spec.sample_period_ms) {
      // Consecutive samples are at least one window apart.
      total += samples;
      continue;
    }
    const std::uint64_t first = sample_timestamp(spec, 0);
    const std::uint64_t last = sample_timestamp(spec, samples - 1);
    total += last / window_ms - first / window_ms + 1;
  }
  return total;
}

ReductionPlan plan_for_table3(SensorType sensor_type, std::uint64_t before_bytes,
                              std::uint64_t after_bytes, const SensorSpec& spec) {
  if (before_bytes < kMinDatasetBytes) {
    throw InvalidTarget("before_bytes must be >= 36, got " + std::to_string(before_bytes));
  }
  if (after_bytes > before_bytes) {
    throw InvalidSizes("after_bytes " + std::to_string(after_bytes) + " exceeds before_bytes " +
                       std::to_string(before_bytes));
  }
  validate(spec);

  ReductionPlan plan;
  plan.sensor_type = sensor_type;
  plan.before_bytes = before_bytes;
  plan.target_after_bytes = after_bytes;
  plan.alert_threshold_milli = static_cast<std::int32_t>(std::llround(spec.alert_threshold * 1000.0));

  if (after_bytes == before_bytes) {
    plan.expected_records = records_for_target(before_bytes);
    plan.expected_after_bytes = before_bytes;
    plan.note = "identity chain";
    return plan;
  }

  const std::uint64_t n = records_for_target(before_bytes);
  const std::uint64_t per_device = (n + spec.device_count - 1) / spec.device_count;
  const std::uint64_t last_ts = sample_timestamp(spec, per_device - 1);
  WindowAggSpec agg;

  if (after_bytes < kMinDatasetBytes) {
    agg.window_ms = last_ts + 1;
    plan.degraded = true;
    plan.note = "target " + std::to_string(after_bytes) +
                " B cannot hold a header and one summary; emitting one whole-dataset summary per device";
  } else {
    const std::uint64_t target = records_for_target(after_bytes);
    auto count_at = [&](std::uint64_t w) { return predicted_summary_count(spec, before_bytes, w); };

    // Closed-form starting point, then an exact local search: summaries are
    // (almost) non-increasing in the window size.
    std::uint64_t lo = 1, hi = last_ts + 1;
    while (lo < hi) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      if (count_at(mid) <= target) hi = mid; else lo = mid + 1;
    }
    std::uint64_t best_w = lo;
    std::uint64_t best_count = count_at(lo);
    auto score = [&](std::uint64_t c) {
      // Prefer exact; then counts below target (paddable toward it); then nearest.
      const std::uint64_t diff = c > target ? c - target : target - c;
      return std::pair{diff, c > target ? 1 : 0};
    };
    const std::uint64_t span = 256;
    for (std::uint64_t w = lo > span ? lo - span : 1; w <= lo + span && w <= last_ts + 1; ++w) {
      const std::uint64_t c = count_at(w);
      if (score(c) < score(best_count)) {
        best_w = w;
        best_count = c;
      }
    }
    agg.window_ms = best_w;
    if (best_count != target) {
      plan.note = "closest window yields " + std::to_string(best_count) + " summaries for a target of " +
                  std::to_string(target);
    }
  }
  agg.pad_output_to = after_bytes;
  plan.aggregate = agg;
  plan.expected_records = predicted_summary_count(spec, before_bytes, agg.window_ms);
  const std::uint64_t natural = kHeaderSize + kRecordSize * plan.expected_records;
  plan.expected_after_bytes =
      after_bytes >= natural && after_bytes - natural < kRecordSize ? after_bytes : natural;
  return plan;
}

PlanOutcome execute_plan(BlockStore& store, const ReductionPlan& plan, const std::string& input_path,
                         std::uint32_t worker_count) {
  PlanOutcome out;
  out.alert_path = input_path + ".alerts";
  out.alerts = run_job(store, semantic_filter_job(plan.alert_threshold_milli, true), input_path,
                       {worker_count, out.alert_path});
  if (!plan.aggregate) {
    out.output_path = input_path;
    out.after_bytes = store.manifest(input_path).total_bytes;
    return out;
  }
  out.output_path = input_path + ".reduced";
  out.aggregate = run_job(store, window_aggregate_job(*plan.aggregate), input_path,
                          {worker_count, out.output_path});
  out.after_bytes = out.aggregate->counters.output_write_bytes;
  return out;
}

double reduction_ratio(std::uint64_t before_bytes, std::uint64_t after_bytes) {
  if (before_bytes == 0 || after_bytes > before_bytes) {
    throw InvalidSizes("reduction_ratio needs 0 < before and after <= before (got " +
                       std::to_string(before_bytes) + ", " + std::to_string(after_bytes) + ")");
  }
  return static_cast<double>(after_bytes) / static_cast<double>(before_bytes);
}

}  // namespace bsmu
