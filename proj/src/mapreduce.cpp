// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/mapreduce.hpp"

#include "bsmu/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace bsmu {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::uint8_t b : bytes.first(std::min<std::size_t>(bytes.size(), 32))) {
    out += kDigits[b >> 4];
    out += kDigits[b & 0xf];
  }
  if (bytes.size() > 32) out += "...";
  return out;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. If tasks throw, the
// exception of the lowest task index is rethrown so failures are reproducible.
template <typename Fn>
void parallel_for(std::size_t n, std::uint32_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max<std::uint32_t>(workers, 1), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t spill_size(const KeyValue& kv) {
  return kSpillFrameOverhead + kv.key.size() + kv.value.size();
}

struct MapTaskOutput {
  std::vector<std::vector<KeyValue>> partitions;
  std::uint64_t input_records = 0;
  std::uint64_t output_records = 0;
  std::uint64_t output_bytes = 0;
  std::uint64_t read_bytes = 0;
  std::uint64_t spill_bytes = 0;
};

struct ReduceTaskOutput {
  std::vector<Bytes> outputs;
  std::uint64_t groups = 0;
  std::uint64_t input_records = 0;
  std::uint64_t read_bytes = 0;
};

// Record indices [first, last) whose first byte lies in [lo, hi).
std::pair<std::uint64_t, std::uint64_t> records_starting_in(std::uint64_t lo, std::uint64_t hi,
                                                            std::uint64_t record_count) {
  auto first_at_or_after = [&](std::uint64_t offset) -> std::uint64_t {
    if (offset <= kHeaderSize) return 0;
    return std::min(record_count, (offset - kHeaderSize + kRecordSize - 1) / kRecordSize);
  };
  return {first_at_or_after(lo), first_at_or_after(hi)};
}

std::vector<KeyValue> call_mapper(const JobSpec& job, const SensorRecord& r, std::uint64_t split,
                                  std::uint64_t index) {
  std::vector<KeyValue> out;
  try {
    out = job.mapper(r);
  } catch (const std::exception& e) {
    throw JobFailure("job '" + job.job_name + "': mapper failed at split " + std::to_string(split) +
                     " record " + std::to_string(index) + " (device " + std::to_string(r.device_id) +
                     " seq " + std::to_string(r.seq_no) + "): " + e.what());
  }
  for (const KeyValue& kv : out) {
    if (kv.key.empty()) {
      throw JobFailure("job '" + job.job_name + "': mapper emitted an empty key at split " +
                       std::to_string(split) + " record " + std::to_string(index));
    }
  }
  return out;
}

std::vector<Bytes> call_reducer(const JobSpec& job, const Bytes& key, const std::vector<Bytes>& values) {
  try {
    return job.reducer(key, values);
  } catch (const std::exception& e) {
    throw JobFailure("job '" + job.job_name + "': reducer failed for key " + hex(key) + ": " + e.what());
  }
}

}  // namespace

std::uint32_t partition(ByteView key, std::uint32_t partition_count) noexcept {
  if (partition_count <= 1) return 0;
  return static_cast<std::uint32_t>(fnv1a64(key) % partition_count);
}

Bytes frame_job_output(const JobSpec& job, const std::vector<Bytes>& outputs) {
  Bytes out;
  if (job.framing == OutputFraming::Raw) {
    for (const Bytes& o : outputs) out.insert(out.end(), o.begin(), o.end());
    return out;
  }
  Dataset d;
  d.records.reserve(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    try {
      d.records.push_back(deserialize_record(outputs[i]));
    } catch (const MalformedRecord& e) {
      throw JobFailure("job '" + job.job_name + "': reducer output " + std::to_string(i) +
                       " is not a record: " + e.what());
    }
  }
  if (job.pad_output_to && *job.pad_output_to >= d.size_bytes() &&
      *job.pad_output_to - d.size_bytes() < kRecordSize) {
    d.pad_len = static_cast<std::uint32_t>(*job.pad_output_to - d.size_bytes());
  }
  return serialize_dataset(d);
}

JobResult run_job(BlockStore& store, const JobSpec& job, const std::string& input_path,
                  const RunOptions& options) {
  if (!job.mapper || !job.reducer) throw JobFailure("job '" + job.job_name + "' lacks a mapper or reducer");
  const std::uint32_t partitions = std::max<std::uint32_t>(job.partition_count, 1);
  const std::uint32_t workers = std::max<std::uint32_t>(options.worker_count, 1);

  JobResult result;
  result.output_path =
      options.output_path.empty() ? input_path + "." + job.job_name + ".out" : options.output_path;
  JobCounters& c = result.counters;

  // Input validation: header, size, padding.
  const BlockManifest manifest = store.manifest(input_path);
  if (manifest.total_bytes < kHeaderSize) {
    throw MalformedInput(input_path + ": shorter than a dataset header");
  }
  DatasetHeader header;
  try {
    header = parse_header(store.read_range(input_path, 0, kHeaderSize));
  } catch (const MalformedRecord& e) {
    throw MalformedInput(input_path + ": " + e.what());
  }
  const std::uint64_t n = header.record_count;
  if (manifest.total_bytes != kHeaderSize + kRecordSize * n + header.pad_len) {
    throw MalformedInput(input_path + ": size disagrees with header");
  }
  const Bytes pad = store.read_range(input_path, manifest.total_bytes - header.pad_len, header.pad_len);
  if (std::any_of(pad.begin(), pad.end(), [](std::uint8_t b) { return b != 0; })) {
    throw MalformedInput(input_path + ": non-zero pad bytes");
  }
  c.input_read_bytes = kHeaderSize + header.pad_len;

  // Map.
  auto t0 = Clock::now();
  const std::size_t splits = manifest.block_count();
  result.map_tasks = splits;
  std::vector<MapTaskOutput> maps(splits);
  parallel_for(splits, workers, [&](std::size_t s) {
    MapTaskOutput& task = maps[s];
    task.partitions.resize(partitions);
    const std::uint64_t lo = manifest.block_offset(s);
    const auto [first, last] = records_starting_in(lo, lo + manifest.block_size_bytes, n);
    if (first == last) return;
    const Bytes raw = store.read_range(input_path, kHeaderSize + kRecordSize * first,
                                       kRecordSize * (last - first));
    task.read_bytes = raw.size();

    std::vector<KeyValue> emitted;
    for (std::uint64_t i = first; i < last; ++i) {
      SensorRecord r;
      try {
        r = deserialize_record(ByteView(raw).subspan(kRecordSize * (i - first), kRecordSize));
      } catch (const MalformedRecord& e) {
        throw MalformedInput(input_path + ": record " + std::to_string(i) + ": " + e.what());
      }
      ++task.input_records;
      for (KeyValue& kv : call_mapper(job, r, s, i)) {
        ++task.output_records;
        task.output_bytes += kv.key.size() + kv.value.size();
        emitted.push_back(std::move(kv));
      }
    }

    if (job.combiner) {
      std::map<Bytes, std::vector<Bytes>> groups;
      for (KeyValue& kv : emitted) groups[std::move(kv.key)].push_back(std::move(kv.value));
      emitted.clear();
      for (auto& [key, values] : groups) {
        std::vector<Bytes> combined;
        try {
          combined = job.combiner(key, values);
        } catch (const std::exception& e) {
          throw JobFailure("job '" + job.job_name + "': combiner failed at split " + std::to_string(s) +
                           " for key " + hex(key) + ": " + e.what());
        }
        for (Bytes& v : combined) emitted.push_back({key, std::move(v)});
      }
    }
    for (KeyValue& kv : emitted) {
      task.spill_bytes += spill_size(kv);
      task.partitions[partition(kv.key, partitions)].push_back(std::move(kv));
    }
  });
  for (const MapTaskOutput& m : maps) {
    c.map_input_records += m.input_records;
    c.map_output_records += m.output_records;
    c.map_output_bytes += m.output_bytes;
    c.input_read_bytes += m.read_bytes;
    c.system_write_bytes += m.spill_bytes;
  }
  result.elapsed_ms.map_ms = ms_since(t0);

  // Shuffle: gather each partition in split order, then a stable sort by key
  // keeps values in (split, record) order.
  t0 = Clock::now();
  std::vector<std::vector<KeyValue>> shuffled(partitions);
  parallel_for(partitions, workers, [&](std::size_t p) {
    std::vector<KeyValue>& bucket = shuffled[p];
    for (MapTaskOutput& m : maps) {
      std::move(m.partitions[p].begin(), m.partitions[p].end(), std::back_inserter(bucket));
    }
    std::stable_sort(bucket.begin(), bucket.end(),
                     [](const KeyValue& a, const KeyValue& b) { return a.key < b.key; });
  });
  maps.clear();
  result.shuffled_pairs.reserve(partitions);
  for (const auto& bucket : shuffled) result.shuffled_pairs.push_back(bucket.size());
  result.elapsed_ms.shuffle_ms = ms_since(t0);

  // Reduce.
  t0 = Clock::now();
  std::vector<ReduceTaskOutput> reduces(partitions);
  parallel_for(partitions, workers, [&](std::size_t p) {
    ReduceTaskOutput& task = reduces[p];
    std::vector<KeyValue>& bucket = shuffled[p];
    for (std::size_t i = 0; i < bucket.size();) {
      std::size_t j = i;
      std::vector<Bytes> values;
      while (j < bucket.size() && bucket[j].key == bucket[i].key) {
        task.read_bytes += spill_size(bucket[j]);
        values.push_back(std::move(bucket[j].value));
        ++j;
      }
      ++task.groups;
      task.input_records += values.size();
      for (Bytes& out : call_reducer(job, bucket[i].key, values)) task.outputs.push_back(std::move(out));
      i = j;
    }
    bucket.clear();
  });
  std::vector<Bytes> outputs;
  for (ReduceTaskOutput& r : reduces) {
    c.reduce_input_groups += r.groups;
    c.reduce_input_records += r.input_records;
    c.system_read_bytes += r.read_bytes;
    c.reduce_output_records += r.outputs.size();
    std::move(r.outputs.begin(), r.outputs.end(), std::back_inserter(outputs));
  }
  const Bytes framed = frame_job_output(job, outputs);
  store.put_or_replace(result.output_path, framed);
  c.output_write_bytes = framed.size();
  result.elapsed_ms.reduce_ms = ms_since(t0);
  return result;
}

Bytes run_sequential_oracle(const BlockStore& store, const JobSpec& job, const std::string& input_path) {
  if (!job.mapper || !job.reducer) throw JobFailure("job '" + job.job_name + "' lacks a mapper or reducer");
  const Bytes raw = store.get(input_path);
  Dataset input;
  try {
    input = parse_dataset(raw);
  } catch (const MalformedRecord& e) {
    throw MalformedInput(input_path + ": " + e.what());
  }

  const std::uint32_t partitions = std::max<std::uint32_t>(job.partition_count, 1);
  std::vector<std::map<Bytes, std::vector<Bytes>>> groups(partitions);
  for (std::size_t i = 0; i < input.records.size(); ++i) {
    for (KeyValue& kv : call_mapper(job, input.records[i], 0, i)) {
      const std::uint32_t p = static_cast<std::uint32_t>(fnv1a64(kv.key) % partitions);
      groups[p][std::move(kv.key)].push_back(std::move(kv.value));
    }
  }
  std::vector<Bytes> outputs;
  for (const auto& part : groups) {
    for (const auto& [key, values] : part) {
      for (Bytes& out : call_reducer(job, key, values)) outputs.push_back(std::move(out));
    }
  }
  return frame_job_output(job, outputs);
}

}  // namespace bsmu
