// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance criteria, one line of output each. Arguments are the unit test
// executables; they are run and timed for the whole-suite budget.

#include "bsmu/blockstore.hpp"
#include "bsmu/energy_model.hpp"
#include "bsmu/errors.hpp"
#include "bsmu/mapreduce.hpp"
#include "bsmu/pipeline.hpp"
#include "bsmu/reduction_jobs.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace bsmu;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Printed {
  SensorType type;
  std::uint64_t before, after;
  double traditional, proposed;
};

constexpr Printed kTable[] = {
    {SensorType::Moisture, 5000, 500, 7.99e-3, 0.21e-3},
    {SensorType::DieselLevel, 5234, 745, 8.654e-3, 2.56e-3},
    {SensorType::Smoke, 3975, 478, 6.78e-3, 1.24e-3},
    {SensorType::Temperature, 5421, 324, 9.21e-3, 1.23e-3},
    {SensorType::Pressure, 4951, 415, 8.96e-3, 1.87e-3},
};

Outcome ac1_energy_reproduction() {
  const auto t0 = Clock::now();
  const EnergyParams p = calibrate(load_calibration_file(std::string(BSMU_DATA_DIR) + "/table3_calibration.txt"));
  double worst = 0.0;
  for (const Printed& row : kTable) {
    worst = std::max(worst, std::abs(energy_traditional(p, row.type, row.before) - row.traditional) / row.traditional);
    worst = std::max(worst, std::abs(energy_proposed(p, row.type, row.after) - row.proposed) / row.proposed);
  }
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << "10 values, worst relative error " << worst << ", " << s << " s";
  return {worst < 1e-12 && s < 1.0, d.str()};
}

Outcome ac2_size_reproduction() {
  const auto t0 = Clock::now();
  const PipelineReport r = run_pipeline(parse_config(default_config_text()));
  const double s = seconds_since(t0);
  bool ok = r.sensors.size() == 5;
  std::ostringstream d;
  d << "after bytes";
  for (std::size_t i = 0; ok && i < 5; ++i) {
    const double want = double(kTable[i].after);
    const double got = double(r.sensors[i].after_bytes);
    ok = r.sensors[i].sensor_type == kTable[i].type && std::abs(got - want) <= 0.05 * want;
    d << ' ' << r.sensors[i].after_bytes << '/' << kTable[i].after;
  }
  d << ", " << s << " s";
  return {ok && s < 10.0, d.str()};
}

Outcome ac3_savings() {
  const EnergyParams p = calibrate(default_calibration_rows());
  const double want[] = {0.9737, 0.7042, 0.8171, 0.8664, 0.7913};
  double s[5];
  bool ok = true;
  std::ostringstream d;
  for (std::size_t i = 0; i < 5; ++i) {
    s[i] = savings_fraction(p, kTable[i].type, kTable[i].before, kTable[i].after);
    ok = ok && std::abs(s[i] - want[i]) <= 1e-4;
    d << display_name(kTable[i].type) << '=' << s[i] << ' ';
  }
  // Moisture > Temperature > Smoke > Pressure > Diesel Level.
  const bool ordered = s[0] > s[3] && s[3] > s[2] && s[2] > s[4] && s[4] > s[1];
  d << (ordered ? "ordering holds" : "ordering broken");
  return {ok && ordered, d.str()};
}

Outcome ac4_determinism() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(0xAC4);
  BlockStore store;
  store.put("in", serialize_dataset(testing::random_dataset(rng, 10000)));
  bool ok = true;
  std::size_t jobs = 0;
  for (const JobSpec& job : {testing::count_by_sensor_job(4), testing::identity_concat_job(3),
                             testing::modulo_job(101, 8), window_aggregate_job({2500})}) {
    Bytes first;
    for (std::uint32_t w : {1u, 2u, 4u, 8u}) {
      const Bytes out = store.get(run_job(store, job, "in", {w, ""}).output_path);
      if (w == 1) first = out;
      ok = ok && out == first;
    }
    ++jobs;
  }
  const double s = seconds_since(t0);
  std::ostringstream d;
  d << jobs << " jobs x workers {1,2,4,8} on 10000 records, " << s << " s";
  return {ok && s < 5.0, d.str()};
}

Outcome ac5_oracle_equivalence() {
  std::mt19937_64 rng(0xAC5);
  std::size_t cases = 0, equal = 0, empty_cases = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = trial < 2 ? 0 : rng() % 1500;
    BlockStore store(StoreConfig{1 + rng() % 2048, 1, 1});
    store.put("in", serialize_dataset(testing::random_dataset(rng, n)));
    const std::uint32_t r = 1 + static_cast<std::uint32_t>(rng() % 6);
    for (const JobSpec& job : {testing::count_by_sensor_job_combined(r), testing::identity_concat_job(r),
                               testing::modulo_job(1 + rng() % 40, r),
                               window_aggregate_job({1 + rng() % 10000, kAllStatistics, r})}) {
      const JobResult res = run_job(store, job, "in", {1 + static_cast<std::uint32_t>(rng() % 8), ""});
      equal += store.get(res.output_path) == run_sequential_oracle(store, job, "in");
      ++cases;
      empty_cases += n == 0;
    }
  }
  std::ostringstream d;
  d << equal << '/' << cases << " byte-identical, " << empty_cases << " on empty input";
  return {cases >= 50 && equal == cases && empty_cases > 0, d.str()};
}

Outcome ac6_blockstore() {
  std::mt19937_64 rng(0xAC6);
  const StoreConfig cfg{1 + rng() % 1024, 3, 5};
  BlockStore store(cfg);
  std::size_t identical = 0, counts_ok = 0, survived = 0;
  constexpr std::size_t kPayloads = 120;
  for (std::size_t i = 0; i < kPayloads; ++i) {
    const std::size_t len = i == 0 ? 0 : (i == 1 ? 10000 : rng() % 10001);
    Bytes data(len);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    const std::string path = "p" + std::to_string(i);
    const BlockManifest m = store.put(path, data);
    identical += store.get(path) == data;
    counts_ok += m.block_count() == (len + cfg.block_size_bytes - 1) / cfg.block_size_bytes;
    for (const BlockInfo& b : m.blocks) {
      for (std::uint32_t k = 0; k + 1 < cfg.replication_factor; ++k) {
        store.corrupt_replica(path, b.index, b.replica_nodes[(k + i) % cfg.replication_factor]);
      }
    }
    try {
      survived += store.get(path) == data;
    } catch (const CorruptBlock&) {
    }
  }
  std::ostringstream d;
  d << "identity " << identical << '/' << kPayloads << ", block count " << counts_ok << '/' << kPayloads
    << ", survived RF-1 corruptions " << survived << '/' << kPayloads;
  return {identical == kPayloads && counts_ok == kPayloads && survived == kPayloads, d.str()};
}

Outcome ac7_report_contract() {
  const PipelineReport r = run_pipeline(parse_config(default_config_text()));
  const std::string text = emit_report(r, ReportFormat::Text);
  bool labels = true;
  for (const char* label : {"VM Size (KBs)", "PM Size (KBs)", "Time Elapsed (ms)", "Input Files",
                            "System Files", "Output Files", "read (KBs)", "Write (KBs)", "Total (KBs)"}) {
    labels = labels && text.find(label) != std::string::npos;
  }
  bool additive = true;
  for (const CounterCells& c : r.counters) additive = additive && c.total == c.original + c.reduction;
  const bool kv_round_trip = parse_report(emit_report(r, ReportFormat::KeyValue)) == r;
  std::ostringstream d;
  d << "labels " << (labels ? "present" : "missing") << ", additivity " << (additive ? "holds" : "broken")
    << " on " << kCounterRows << " rows";
  return {labels && additive && kv_round_trip, d.str()};
}

Outcome ac8_global_fit() {
  const auto rows = default_calibration_rows();
  const GlobalFit abs = fit_global_coefficient(rows, FitWeighting::Absolute);
  const GlobalFit rel = fit_global_coefficient(rows, FitWeighting::Relative);
  std::ostringstream d;
  d << "worst relative residual " << abs.max_abs_relative_residual * 100 << "% (least squares), "
    << rel.max_abs_relative_residual * 100 << "% (relative weights)";
  return {abs.max_abs_relative_residual > 0.10 && rel.max_abs_relative_residual > 0.10, d.str()};
}

Outcome ac9_suite_time(const std::vector<std::string>& binaries, double own_seconds) {
  const auto t0 = Clock::now();
  bool ok = !binaries.empty();
  for (const std::string& bin : binaries) {
    const std::string cmd = "\"" + bin + "\" > /dev/null 2>&1";
    ok = ok && std::system(cmd.c_str()) == 0;
  }
  const double s = seconds_since(t0) + own_seconds;
  std::ostringstream d;
  d << binaries.size() << " unit binaries plus acceptance in " << s << " s";
  if (!ok) d << " (a unit binary failed or none given)";
  return {ok && s < 60.0, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const auto t0 = Clock::now();
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 energy reproduction", ac1_energy_reproduction},
      {"AC2 size reproduction", ac2_size_reproduction},
      {"AC3 savings fractions", ac3_savings},
      {"AC4 mapreduce determinism", ac4_determinism},
      {"AC5 oracle equivalence", ac5_oracle_equivalence},
      {"AC6 blockstore properties", ac6_blockstore},
      {"AC7 report contract", ac7_report_contract},
      {"AC8 global fit infeasible", ac8_global_fit},
  };
  int failed = 0;
  auto report = [&failed](const char* name, const Outcome& o) {
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += !o.pass;
  };
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    report(name, o);
  }
  report("AC9 suite runtime", ac9_suite_time(std::vector<std::string>(argv + 1, argv + argc), seconds_since(t0)));
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
