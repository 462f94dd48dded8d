// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/pipeline.hpp"

#include "bsmu/errors.hpp"
#include "bsmu/mapreduce.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace bsmu {

namespace {

constexpr double kKb = 1024.0;

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

// Per-sensor work that can run concurrently: everything up to the uplink.
struct SensorRun {
  SensorType sensor = SensorType::Moisture;
  std::string raw_path;
  std::uint64_t raw_bytes = 0;
  JobResult original;
  MemorySample after_original;
  ReductionPlan plan;
  PlanOutcome reduced;
  MemorySample after_reduction;
};

SensorRun run_sensor(BlockStore& store, const SensorPipelineConfig& cfg, std::uint32_t workers) {
  SensorRun run;
  run.sensor = cfg.spec.sensor_type;
  const std::string name(key_name(run.sensor));
  run.raw_path = "raw/" + name + ".bsmu";

  stage("acquisition[" + name + "]", [&] {
    const Bytes raw = serialize_dataset(generate_dataset(cfg.spec, cfg.before_bytes));
    run.raw_bytes = raw.size();
    store.put_or_replace(run.raw_path, raw);
  });

  run.original = stage("original[" + name + "]", [&] {
    return run_job(store, passthrough_job(), run.raw_path, {workers, "original/" + name + ".bsmu"});
  });
  run.after_original = sample_process_memory();

  run.plan = stage("planning[" + name + "]", [&] {
    ReductionPlan plan = plan_for_table3(run.sensor, cfg.before_bytes, cfg.after_bytes, cfg.spec);
    if (cfg.window_ms) {
      WindowAggSpec agg = plan.aggregate.value_or(WindowAggSpec{});
      agg.window_ms = *cfg.window_ms;
      agg.pad_output_to = cfg.after_bytes;
      plan.aggregate = agg;
      plan.expected_records = predicted_summary_count(cfg.spec, cfg.before_bytes, agg.window_ms);
      plan.note = "window_ms set by config";
    }
    return plan;
  });
  run.reduced = stage("reduction[" + name + "]", [&] {
    return execute_plan(store, run.plan, run.raw_path, workers);
  });
  run.after_reduction = sample_process_memory();
  return run;
}

void add_job(std::array<double, kCounterRows>& col, const JobResult& r) {
  const JobCounters& c = r.counters;
  col[static_cast<std::size_t>(CounterRow::TimeElapsed)] += r.elapsed_ms.total_ms();
  col[static_cast<std::size_t>(CounterRow::InputRead)] += c.input_read_bytes / kKb;
  col[static_cast<std::size_t>(CounterRow::SystemRead)] += c.system_read_bytes / kKb;
  col[static_cast<std::size_t>(CounterRow::SystemWrite)] += c.system_write_bytes / kKb;
  col[static_cast<std::size_t>(CounterRow::OutputWrite)] += c.output_write_bytes / kKb;
}

void write_file(const std::filesystem::path& path, ByteView data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

MemorySample sample_process_memory() {
  MemorySample m;
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    std::istringstream fields(line);
    std::string name;
    std::uint64_t kb = 0;
    fields >> name >> kb;
    if (name == "VmSize:") m.vm_size_kb = kb;
    else if (name == "VmHWM:") m.peak_resident_kb = kb;
  }
  return m;
}

PipelineReport run_pipeline(const PipelineConfig& config, PipelineArtifacts* artifacts) {
  stage("config", [&] { validate(config); });

  const EnergyParams params = stage("calibration", [&] {
    return calibrate(config.calibration_path.empty() ? default_calibration_rows()
                                                     : load_calibration_file(config.calibration_path));
  });

  BlockStore store(config.store);
  std::vector<SensorRun> runs;
  if (config.parallel_sensors && config.sensors.size() > 1) {
    std::vector<std::future<SensorRun>> pending;
    for (const auto& cfg : config.sensors) {
      pending.push_back(std::async(std::launch::async, [&store, &cfg, &config] {
        return run_sensor(store, cfg, config.worker_count);
      }));
    }
    for (auto& f : pending) runs.push_back(f.get());
  } else {
    for (const auto& cfg : config.sensors) runs.push_back(run_sensor(store, cfg, config.worker_count));
  }

  // Uplink runs in sensor order so the ledger is reproducible.
  CloudStore cloud;
  Uplink uplink(cloud, params);
  PipelineReport report;
  std::array<double, kCounterRows> original{};
  std::array<double, kCounterRows> reduction{};
  MemorySample mem_original, mem_reduction;
  std::vector<std::vector<Notification>> notifications;

  for (const SensorRun& run : runs) {
    const std::string name(key_name(run.sensor));
    add_job(original, run.original);
    original[static_cast<std::size_t>(CounterRow::InputWrite)] += run.raw_bytes / kKb;
    if (run.reduced.aggregate) add_job(reduction, *run.reduced.aggregate);
    add_job(reduction, run.reduced.alerts);
    mem_original.vm_size_kb = std::max(mem_original.vm_size_kb, run.after_original.vm_size_kb);
    mem_original.peak_resident_kb = std::max(mem_original.peak_resident_kb, run.after_original.peak_resident_kb);
    mem_reduction.vm_size_kb = std::max(mem_reduction.vm_size_kb, run.after_reduction.vm_size_kb);
    mem_reduction.peak_resident_kb =
        std::max(mem_reduction.peak_resident_kb, run.after_reduction.peak_resident_kb);

    SensorComparison row = stage("uplink[" + name + "]", [&] {
      SensorComparison cmp;
      cmp.sensor_type = run.sensor;
      const Bytes raw = store.get(run.raw_path);
      const Bytes reduced = store.get(run.reduced.output_path);
      const TransmissionLog trad = uplink.transmit(raw, run.sensor, TransmitMode::Traditional);
      const TransmissionLog prop = uplink.transmit(reduced, run.sensor, TransmitMode::Proposed);
      cmp.before_bytes = trad.bytes_sent;
      cmp.after_bytes = prop.bytes_sent;
      cmp.energy_traditional = trad.energy_charged;
      cmp.energy_proposed = prop.energy_charged;
      cmp.savings_fraction = 1.0 - prop.energy_charged / trad.energy_charged;
      cmp.window_ms = run.plan.aggregate ? run.plan.aggregate->window_ms : 0;
      return cmp;
    });
    notifications.push_back(stage("notify[" + name + "]", [&] {
      return dispatch_notifications(store.get(run.reduced.alert_path), run.plan.alert_threshold_milli);
    }));
    row.notifications = notifications.back().size();
    report.sensors.push_back(row);
  }

  original[static_cast<std::size_t>(CounterRow::VmSize)] = static_cast<double>(mem_original.vm_size_kb);
  original[static_cast<std::size_t>(CounterRow::PmSize)] = static_cast<double>(mem_original.peak_resident_kb);
  reduction[static_cast<std::size_t>(CounterRow::VmSize)] = static_cast<double>(mem_reduction.vm_size_kb);
  reduction[static_cast<std::size_t>(CounterRow::PmSize)] = static_cast<double>(mem_reduction.peak_resident_kb);
  for (auto* col : {&original, &reduction}) {
    auto& c = *col;
    c[static_cast<std::size_t>(CounterRow::Total)] =
        c[static_cast<std::size_t>(CounterRow::InputRead)] + c[static_cast<std::size_t>(CounterRow::InputWrite)] +
        c[static_cast<std::size_t>(CounterRow::SystemRead)] + c[static_cast<std::size_t>(CounterRow::SystemWrite)] +
        c[static_cast<std::size_t>(CounterRow::OutputWrite)];
  }
  for (std::size_t i = 0; i < kCounterRows; ++i) report.counters[i] = CounterCells::of(original[i], reduction[i]);

  if (!config.output_dir.empty()) {
    stage("output", [&] {
      namespace fs = std::filesystem;
      const fs::path root(config.output_dir);
      fs::create_directories(root / "datasets");
      for (const SensorRun& run : runs) {
        const std::string name(key_name(run.sensor));
        write_file(root / "datasets" / (name + ".raw.bsmu"), store.get(run.raw_path));
        write_file(root / "datasets" / (name + ".reduced.bsmu"), store.get(run.reduced.output_path));
        write_file(root / "datasets" / (name + ".alerts.bsmu"), store.get(run.reduced.alert_path));
      }
      const std::string ledger = uplink.export_ledger();
      write_file(root / "transmissions.csv", to_bytes(ledger));
      store.save(root / "store");
    });
  }

  if (artifacts) {
    artifacts->transmissions = uplink.logs();
    artifacts->ledger_csv = uplink.export_ledger();
    artifacts->plans.clear();
    for (const SensorRun& run : runs) artifacts->plans.push_back(run.plan);
    artifacts->notifications = std::move(notifications);
  }
  return report;
}

}  // namespace bsmu
