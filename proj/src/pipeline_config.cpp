// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/errors.hpp"
#include "bsmu/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <map>

namespace bsmu {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class LineContext {
 public:
  LineContext(std::size_t line, std::string_view key) : line_(line), key_(key) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("config line " + std::to_string(line_) + " (" + std::string(key_) + "): " + what);
  }

  template <typename T>
  T number(std::string_view value) const {
    T v{};
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || p != value.data() + value.size()) {
      fail("expected a number, got '" + std::string(value) + "'");
    }
    return v;
  }

  bool boolean(std::string_view value) const {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    fail("expected true or false, got '" + std::string(value) + "'");
  }

 private:
  std::size_t line_;
  std::string_view key_;
};

struct SensorDraft {
  SensorPipelineConfig cfg;
  bool has_before = false;
  bool has_after = false;
};

}  // namespace

std::optional<ReportFormat> report_format_from_name(std::string_view name) noexcept {
  if (name == "text") return ReportFormat::Text;
  if (name == "kv") return ReportFormat::KeyValue;
  return std::nullopt;
}

const SensorPipelineConfig* PipelineConfig::find(SensorType t) const noexcept {
  for (const auto& s : sensors) {
    if (s.spec.sensor_type == t) return &s;
  }
  return nullptr;
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config;
  std::map<SensorType, SensorDraft> drafts;
  std::size_t settings = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected section.key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const LineContext ctx(line_no, key);
    const auto dot = key.rfind('.');
    if (dot == std::string_view::npos || dot == 0) ctx.fail("key must be section.key");
    const std::string_view section = key.substr(0, dot);
    const std::string_view field = key.substr(dot + 1);
    ++settings;

    if (section == "pipeline") {
      if (field == "workers") {
        config.worker_count = ctx.number<std::uint32_t>(value);
      } else if (field == "calibration") {
        config.calibration_path = std::string(value);
      } else if (field == "output_dir") {
        config.output_dir = std::string(value);
      } else if (field == "format") {
        const auto f = report_format_from_name(value);
        if (!f) ctx.fail("format must be text or kv");
        config.format = *f;
      } else if (field == "parallel") {
        config.parallel_sensors = ctx.boolean(value);
      } else {
        ctx.fail("unknown pipeline setting");
      }
    } else if (section == "store") {
      if (field == "block_size") {
        config.store.block_size_bytes = ctx.number<std::uint64_t>(value);
      } else if (field == "replication") {
        config.store.replication_factor = ctx.number<std::uint32_t>(value);
      } else if (field == "nodes") {
        config.store.node_count = ctx.number<std::uint32_t>(value);
      } else {
        ctx.fail("unknown store setting");
      }
    } else if (section.starts_with("sensor.")) {
      const auto sensor = sensor_from_name(section.substr(7));
      if (!sensor) ctx.fail("unknown sensor '" + std::string(section.substr(7)) + "'");
      auto [it, fresh] = drafts.try_emplace(*sensor);
      SensorDraft& d = it->second;
      if (fresh) d.cfg.spec = SensorSpec::defaults_for(*sensor);
      SensorSpec& s = d.cfg.spec;
      if (field == "before_bytes") {
        d.cfg.before_bytes = ctx.number<std::uint64_t>(value);
        d.has_before = true;
      } else if (field == "after_bytes") {
        d.cfg.after_bytes = ctx.number<std::uint64_t>(value);
        d.has_after = true;
      } else if (field == "devices") {
        s.device_count = ctx.number<std::uint32_t>(value);
      } else if (field == "period_ms") {
        s.sample_period_ms = ctx.number<std::uint64_t>(value);
      } else if (field == "start_ms") {
        s.start_ms = ctx.number<std::uint64_t>(value);
      } else if (field == "mean") {
        s.value_mean = ctx.number<double>(value);
      } else if (field == "stddev") {
        s.value_stddev = ctx.number<double>(value);
      } else if (field == "alert_threshold") {
        s.alert_threshold = ctx.number<double>(value);
      } else if (field == "seed") {
        s.seed = ctx.number<std::uint64_t>(value);
      } else if (field == "window_ms") {
        d.cfg.window_ms = ctx.number<std::uint64_t>(value);
      } else {
        ctx.fail("unknown sensor setting");
      }
    } else {
      ctx.fail("unknown section '" + std::string(section) + "'");
    }
  }

  if (settings == 0) throw ParseError("config is empty");
  for (auto& [type, d] : drafts) {
    if (!d.has_before || !d.has_after) {
      throw ValidationError("sensor." + std::string(key_name(type)) + " needs before_bytes and after_bytes");
    }
    config.sensors.push_back(d.cfg);
  }
  validate(config);
  return config;
}

void validate(const PipelineConfig& config) {
  if (config.worker_count < 1) throw ValidationError("pipeline.workers must be >= 1");
  try {
    validate(config.store);
  } catch (const InvalidConfig& e) {
    throw ValidationError(std::string("store: ") + e.what());
  }
  for (std::size_t i = 0; i < config.sensors.size(); ++i) {
    const SensorPipelineConfig& s = config.sensors[i];
    const std::string where = "sensor." + std::string(key_name(s.spec.sensor_type));
    for (std::size_t j = 0; j < i; ++j) {
      if (config.sensors[j].spec.sensor_type == s.spec.sensor_type) {
        throw ValidationError(where + " configured twice");
      }
    }
    try {
      validate(s.spec);
    } catch (const InvalidSpec& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (s.before_bytes < kMinDatasetBytes) throw ValidationError(where + ".before_bytes must be >= 36");
    if (s.after_bytes > s.before_bytes) throw ValidationError(where + ".after_bytes exceeds before_bytes");
    if (s.window_ms && *s.window_ms == 0) throw ValidationError(where + ".window_ms must be >= 1");
  }
}

std::string default_config_text() {
  std::string out =
      "# Base station monitoring pipeline, all five sensors.\n"
      "pipeline.workers=2\n"
      "pipeline.format=text\n"
      "\n"
      "store.block_size=1024\n"
      "store.replication=3\n"
      "store.nodes=4\n";
  for (const CalibrationRow& row : default_calibration_rows()) {
    const SensorSpec s = SensorSpec::defaults_for(row.sensor_type);
    const std::string p = "sensor." + std::string(key_name(row.sensor_type)) + ".";
    char buf[64];
    auto num = [&](double v) {
      auto [e, ec] = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, e);
    };
    out += "\n";
    out += p + "before_bytes=" + std::to_string(row.before_bytes) + "\n";
    out += p + "after_bytes=" + std::to_string(row.after_bytes) + "\n";
    out += p + "devices=" + std::to_string(s.device_count) + "\n";
    out += p + "period_ms=" + std::to_string(s.sample_period_ms) + "\n";
    out += p + "mean=" + num(s.value_mean) + "\n";
    out += p + "stddev=" + num(s.value_stddev) + "\n";
    out += p + "alert_threshold=" + num(s.alert_threshold) + "\n";
    out += p + "seed=" + std::to_string(s.seed) + "\n";
  }
  return out;
}

}  // namespace bsmu
