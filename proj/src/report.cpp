// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/errors.hpp"
#include "bsmu/pipeline.hpp"

#include <charconv>
#include <cstdio>
#include <map>

namespace bsmu {

namespace {

struct RowInfo {
  std::string_view label;
  std::string_view group;
  std::string_view key;
};

constexpr std::array<RowInfo, kCounterRows> kRows = {{
    {"VM Size (KBs)", "Proposed Mechanism", "vm_size_kb"},
    {"PM Size (KBs)", "Proposed Mechanism", "pm_size_kb"},
    {"Time Elapsed (ms)", "Proposed Mechanism", "time_elapsed_ms"},
    {"Total (KBs)", "Proposed Mechanism", "total_kb"},
    {"read (KBs)", "Input Files", "input_read_kb"},
    {"Write (KBs)", "Input Files", "input_write_kb"},
    {"read (KBs)", "System Files", "system_read_kb"},
    {"Write (KBs)", "System Files", "system_write_kb"},
    {"Write (KBs)", "Output Files", "output_write_kb"},
}};

constexpr std::array<std::string_view, 3> kColumns = {"original", "reduction", "total"};

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad_right(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) out.append(width - out.size(), ' ');
  return out;
}

std::string pad_left(std::string_view s, std::size_t width) {
  std::string out;
  if (s.size() < width) out.append(width - s.size(), ' ');
  out += s;
  return out;
}

std::string text_report(const PipelineReport& report) {
  std::string out;
  out += "Data analytic and semantic analysis counters\n";
  out += pad_right("Group", 20) + pad_right("Counter", 20) + pad_left("Original", 14) +
         pad_left("Reduction", 14) + pad_left("Total", 14) + "\n";
  std::string_view last_group;
  for (std::size_t i = 0; i < kCounterRows; ++i) {
    const CounterCells& c = report.counters[i];
    const std::string_view group = kRows[i].group == last_group ? "" : kRows[i].group;
    last_group = kRows[i].group;
    out += pad_right(group, 20) + pad_right(kRows[i].label, 20) + pad_left(fixed(c.original, 3), 14) +
           pad_left(fixed(c.reduction, 3), 14) + pad_left(fixed(c.total, 3), 14) + "\n";
  }
  if (report.sensors.empty()) return out;

  out += "\nTransmission size and energy per sensor\n";
  out += pad_right("IoT Sensor", 14) + pad_left("Before (B)", 12) + pad_left("After (B)", 11) +
         pad_left("Traditional", 14) + pad_left("Proposed", 14) + pad_left("Savings", 10) +
         pad_left("Window (ms)", 13) + pad_left("Alerts", 8) + "\n";
  char e1[32], e2[32];
  for (const SensorComparison& s : report.sensors) {
    std::snprintf(e1, sizeof e1, "%.4e", s.energy_traditional);
    std::snprintf(e2, sizeof e2, "%.4e", s.energy_proposed);
    out += pad_right(display_name(s.sensor_type), 14) + pad_left(std::to_string(s.before_bytes), 12) +
           pad_left(std::to_string(s.after_bytes), 11) + pad_left(e1, 14) + pad_left(e2, 14) +
           pad_left(fixed(s.savings_fraction, 4), 10) + pad_left(std::to_string(s.window_ms), 13) +
           pad_left(std::to_string(s.notifications), 8) + "\n";
  }
  return out;
}

std::string kv_report(const PipelineReport& report) {
  std::string out;
  for (std::size_t i = 0; i < kCounterRows; ++i) {
    const CounterCells& c = report.counters[i];
    const std::array<double, 3> cells = {c.original, c.reduction, c.total};
    for (std::size_t col = 0; col < 3; ++col) {
      out += "counters." + std::string(kRows[i].key) + "." + std::string(kColumns[col]) + "=" +
             shortest(cells[col]) + "\n";
    }
  }
  for (const SensorComparison& s : report.sensors) {
    const std::string p = "sensor." + std::string(key_name(s.sensor_type)) + ".";
    out += p + "before_bytes=" + std::to_string(s.before_bytes) + "\n";
    out += p + "after_bytes=" + std::to_string(s.after_bytes) + "\n";
    out += p + "energy_traditional=" + shortest(s.energy_traditional) + "\n";
    out += p + "energy_proposed=" + shortest(s.energy_proposed) + "\n";
    out += p + "savings_fraction=" + shortest(s.savings_fraction) + "\n";
    out += p + "window_ms=" + std::to_string(s.window_ms) + "\n";
    out += p + "notifications=" + std::to_string(s.notifications) + "\n";
  }
  return out;
}

}  // namespace

std::string_view counter_label(CounterRow row) noexcept { return kRows[static_cast<std::size_t>(row)].label; }
std::string_view counter_group(CounterRow row) noexcept { return kRows[static_cast<std::size_t>(row)].group; }
std::string_view counter_key(CounterRow row) noexcept { return kRows[static_cast<std::size_t>(row)].key; }

bool host_dependent(CounterRow row) noexcept {
  return row == CounterRow::VmSize || row == CounterRow::PmSize || row == CounterRow::TimeElapsed;
}

std::string emit_report(const PipelineReport& report, ReportFormat format) {
  return format == ReportFormat::Text ? text_report(report) : kv_report(report);
}

PipelineReport parse_report(std::string_view text) {
  PipelineReport report;
  std::map<SensorType, SensorComparison> sensors;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "report line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(where + ": expected section.row.column=value");
    const std::string_view key = line.substr(0, eq);
    const std::string_view value = line.substr(eq + 1);
    const auto d1 = key.find('.');
    const auto d2 = key.rfind('.');
    if (d1 == std::string_view::npos || d1 == d2) throw ParseError(where + ": expected section.row.column");
    const std::string_view section = key.substr(0, d1);
    const std::string_view row = key.substr(d1 + 1, d2 - d1 - 1);
    const std::string_view column = key.substr(d2 + 1);

    auto as_double = [&]() {
      double v = 0.0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size()) throw ParseError(where + ": bad number");
      return v;
    };
    auto as_u64 = [&]() {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc{} || p != value.data() + value.size()) throw ParseError(where + ": bad integer");
      return v;
    };

    if (section == "counters") {
      std::size_t r = 0;
      while (r < kCounterRows && kRows[r].key != row) ++r;
      if (r == kCounterRows) throw ParseError(where + ": unknown counter '" + std::string(row) + "'");
      CounterCells& c = report.counters[r];
      if (column == "original") c.original = as_double();
      else if (column == "reduction") c.reduction = as_double();
      else if (column == "total") c.total = as_double();
      else throw ParseError(where + ": unknown column '" + std::string(column) + "'");
    } else if (section == "sensor") {
      const auto t = sensor_from_name(row);
      if (!t) throw ParseError(where + ": unknown sensor '" + std::string(row) + "'");
      SensorComparison& s = sensors[*t];
      s.sensor_type = *t;
      if (column == "before_bytes") s.before_bytes = as_u64();
      else if (column == "after_bytes") s.after_bytes = as_u64();
      else if (column == "energy_traditional") s.energy_traditional = as_double();
      else if (column == "energy_proposed") s.energy_proposed = as_double();
      else if (column == "savings_fraction") s.savings_fraction = as_double();
      else if (column == "window_ms") s.window_ms = as_u64();
      else if (column == "notifications") s.notifications = as_u64();
      else throw ParseError(where + ": unknown field '" + std::string(column) + "'");
    } else {
      throw ParseError(where + ": unknown section '" + std::string(section) + "'");
    }
  }
  for (auto& [_, s] : sensors) report.sensors.push_back(s);
  return report;
}

}  // namespace bsmu
