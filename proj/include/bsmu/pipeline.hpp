// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file pipeline.hpp
/// @brief End-to-end orchestration (acquisition, storage, reduction, energy
/// accounting, uplink) plus the config and report formats around it.

#pragma once

#include "bsmu/blockstore.hpp"
#include "bsmu/energy_model.hpp"
#include "bsmu/reduction_jobs.hpp"
#include "bsmu/sensor_ingest.hpp"
#include "bsmu/uplink_cloud.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bsmu {

enum class ReportFormat { Text, KeyValue };

std::optional<ReportFormat> report_format_from_name(std::string_view name) noexcept;

struct SensorPipelineConfig {
  SensorSpec spec;
  std::uint64_t before_bytes = 0;
  std::uint64_t after_bytes = 0;
  /// Overrides the planner's window size.
  std::optional<std::uint64_t> window_ms;
};

struct PipelineConfig {
  /// Ordered by sensor code.
  std::vector<SensorPipelineConfig> sensors;
  StoreConfig store;
  std::uint32_t worker_count = 1;
  /// Empty selects the built-in calibration table.
  std::string calibration_path;
  /// Empty disables artifact output.
  std::string output_dir;
  ReportFormat format = ReportFormat::Text;
  /// Runs per-sensor acquisition and reduction concurrently.
  bool parallel_sensors = false;

  const SensorPipelineConfig* find(SensorType t) const noexcept;
};

/// Line-oriented `section.key=value`; `#` starts a comment. Sections are
/// `pipeline`, `store` and `sensor.<name>`.
/// @throws ParseError (syntax, unknown keys, bad numbers; with line context)
/// and ValidationError (values that break an invariant).
PipelineConfig parse_config(std::string_view text);

/// @throws ValidationError
void validate(const PipelineConfig& config);

/// Config covering all five sensors at the shipped calibration sizes.
std::string default_config_text();

// -- Report -----------------------------------------------------------------

enum class CounterRow : std::uint8_t {
  VmSize,
  PmSize,
  TimeElapsed,
  Total,
  InputRead,
  InputWrite,
  SystemRead,
  SystemWrite,
  OutputWrite,
};
inline constexpr std::size_t kCounterRows = 9;

/// Table label, e.g. "VM Size (KBs)".
std::string_view counter_label(CounterRow row) noexcept;
/// Group the row is listed under, e.g. "Input Files".
std::string_view counter_group(CounterRow row) noexcept;
/// Machine-readable row key, e.g. "vm_size_kb".
std::string_view counter_key(CounterRow row) noexcept;

struct CounterCells {
  double original = 0.0;
  double reduction = 0.0;
  double total = 0.0;

  static CounterCells of(double original, double reduction) {
    return {original, reduction, original + reduction};
  }
  friend bool operator==(const CounterCells&, const CounterCells&) = default;
};

struct SensorComparison {
  SensorType sensor_type = SensorType::Moisture;
  std::uint64_t before_bytes = 0;
  std::uint64_t after_bytes = 0;
  double energy_traditional = 0.0;
  double energy_proposed = 0.0;
  double savings_fraction = 0.0;
  std::uint64_t window_ms = 0;
  std::uint64_t notifications = 0;

  friend bool operator==(const SensorComparison&, const SensorComparison&) = default;
};

struct PipelineReport {
  std::array<CounterCells, kCounterRows> counters{};
  std::vector<SensorComparison> sensors;

  CounterCells& at(CounterRow r) noexcept { return counters[static_cast<std::size_t>(r)]; }
  const CounterCells& at(CounterRow r) const noexcept { return counters[static_cast<std::size_t>(r)]; }
  friend bool operator==(const PipelineReport&, const PipelineReport&) = default;
};

/// Rows whose values depend on the host (memory, wall-clock time).
bool host_dependent(CounterRow row) noexcept;

std::string emit_report(const PipelineReport& report, ReportFormat format);

/// Parses the key/value format written by emit_report. @throws ParseError
PipelineReport parse_report(std::string_view text);

// -- Run --------------------------------------------------------------------

/// Everything run_pipeline produced besides the report.
struct PipelineArtifacts {
  std::vector<TransmissionLog> transmissions;
  std::string ledger_csv;
  std::vector<ReductionPlan> plans;
  std::vector<std::vector<Notification>> notifications;
};

/// Errors from any stage surface as PipelineError naming the stage.
PipelineReport run_pipeline(const PipelineConfig& config, PipelineArtifacts* artifacts = nullptr);

struct MemorySample {
  std::uint64_t vm_size_kb = 0;
  std::uint64_t peak_resident_kb = 0;
};

/// Process virtual size and peak resident set; zeros when unavailable.
MemorySample sample_process_memory();

}  // namespace bsmu
