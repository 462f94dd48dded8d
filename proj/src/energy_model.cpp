// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/energy_model.hpp"

#include "bsmu/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

namespace bsmu {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string shortest(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace

std::string_view mode_name(TransmitMode mode) noexcept {
  return mode == TransmitMode::Traditional ? "traditional" : "proposed";
}

std::optional<TransmitMode> mode_from_name(std::string_view name) noexcept {
  if (name == "traditional") return TransmitMode::Traditional;
  if (name == "proposed") return TransmitMode::Proposed;
  return std::nullopt;
}

EnergyParams calibrate(const std::vector<CalibrationRow>& rows) {
  EnergyParams p;
  std::array<bool, 5> seen{};
  for (const CalibrationRow& r : rows) {
    const std::size_t i = index_of(r.sensor_type);
    if (seen[i]) throw MissingSensor("duplicate calibration row for " + std::string(display_name(r.sensor_type)));
    if (r.before_bytes == 0 || r.after_bytes == 0 || !(r.energy_traditional > 0.0) ||
        !(r.energy_proposed > 0.0)) {
      throw NonPositiveValue("calibration row for " + std::string(display_name(r.sensor_type)) +
                             " has a non-positive size or energy");
    }
    seen[i] = true;
    p.coeffs_[i].alpha = r.energy_traditional / static_cast<double>(r.before_bytes);
    p.coeffs_[i].beta = r.energy_proposed / static_cast<double>(r.after_bytes);
  }
  for (SensorType t : kAllSensors) {
    if (!seen[index_of(t)]) throw MissingSensor("no calibration row for " + std::string(display_name(t)));
  }
  p.calibrated_ = true;
  return p;
}

double energy_traditional(const EnergyParams& params, SensorType sensor, std::uint64_t bytes) noexcept {
  return params.alpha(sensor) * static_cast<double>(bytes);
}

double energy_proposed(const EnergyParams& params, SensorType sensor, std::uint64_t bytes) noexcept {
  return params.beta(sensor) * static_cast<double>(bytes);
}

double energy_for(const EnergyParams& params, TransmitMode mode, SensorType sensor,
                  std::uint64_t bytes) noexcept {
  return mode == TransmitMode::Traditional ? energy_traditional(params, sensor, bytes)
                                           : energy_proposed(params, sensor, bytes);
}

double savings_fraction(const EnergyParams& params, SensorType sensor, std::uint64_t before_bytes,
                        std::uint64_t after_bytes) noexcept {
  return 1.0 - energy_proposed(params, sensor, after_bytes) /
                   energy_traditional(params, sensor, before_bytes);
}

std::string_view component_name(BsComponent c) noexcept {
  static constexpr std::array<std::string_view, kComponentCount> kNames = {
      "power_amplifier", "rf_circuitry", "baseband", "cooling", "other"};
  return kNames[static_cast<std::size_t>(c)];
}

std::array<double, kComponentCount> breakdown(double energy, const ComponentBreakdown& shares) {
  double sum = 0.0;
  for (double s : shares.shares) {
    if (!(s >= 0.0)) throw InvalidShares("component shares must be non-negative");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidShares("component shares must sum to 1");
  std::array<double, kComponentCount> out{};
  for (std::size_t i = 0; i < kComponentCount; ++i) out[i] = energy * shares.shares[i];
  return out;
}

std::vector<CalibrationRow> default_calibration_rows() {
  return {
      {SensorType::Moisture, 5000, 500, 7.99e-3, 0.21e-3},
      {SensorType::DieselLevel, 5234, 745, 8.654e-3, 2.56e-3},
      {SensorType::Smoke, 3975, 478, 6.78e-3, 1.24e-3},
      {SensorType::Temperature, 5421, 324, 9.21e-3, 1.23e-3},
      {SensorType::Pressure, 4951, 415, 8.96e-3, 1.87e-3},
  };
}

std::string default_calibration_text() { return format_calibration(default_calibration_rows()); }

std::string format_calibration(const std::vector<CalibrationRow>& rows) {
  std::string out;
  out += "# sensor,before_bytes,after_bytes,energy_traditional,energy_proposed\n";
  out += kCalibrationMagic;
  out += '\n';
  for (const CalibrationRow& r : rows) {
    out += std::string(key_name(r.sensor_type)) + ',' + std::to_string(r.before_bytes) + ',' +
           std::to_string(r.after_bytes) + ',' + shortest(r.energy_traditional) + ',' +
           shortest(r.energy_proposed) + '\n';
  }
  return out;
}

std::vector<CalibrationRow> parse_calibration(std::string_view text) {
  std::vector<CalibrationRow> rows;
  bool have_magic = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::string where = "calibration line " + std::to_string(line_no);
    if (!have_magic) {
      if (line != kCalibrationMagic) throw ParseError(where + ": expected '" + std::string(kCalibrationMagic) + "'");
      have_magic = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = std::min(line.find(',', start), line.size());
      fields.push_back(trim(line.substr(start, comma - start)));
      start = comma + 1;
    }
    if (fields.size() != 5) throw ParseError(where + ": expected 5 comma-separated fields");
    CalibrationRow r;
    const auto sensor = sensor_from_name(fields[0]);
    if (!sensor) throw ParseError(where + ": unknown sensor '" + std::string(fields[0]) + "'");
    r.sensor_type = *sensor;
    auto parse_u = [&](std::string_view f, std::uint64_t& v, const char* name) {
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) throw ParseError(where + ": bad " + name);
    };
    auto parse_d = [&](std::string_view f, double& v, const char* name) {
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || p != f.data() + f.size()) throw ParseError(where + ": bad " + name);
    };
    parse_u(fields[1], r.before_bytes, "before_bytes");
    parse_u(fields[2], r.after_bytes, "after_bytes");
    parse_d(fields[3], r.energy_traditional, "energy_traditional");
    parse_d(fields[4], r.energy_proposed, "energy_proposed");
    rows.push_back(r);
  }
  if (!have_magic) throw ParseError("calibration text has no '" + std::string(kCalibrationMagic) + "' line");
  return rows;
}

std::vector<CalibrationRow> load_calibration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read calibration file " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_calibration(text);
}

GlobalFit fit_global_coefficient(const std::vector<CalibrationRow>& rows, FitWeighting weighting) {
  std::vector<double> bytes;
  std::vector<double> energy;
  for (const CalibrationRow& r : rows) {
    bytes.push_back(static_cast<double>(r.before_bytes));
    energy.push_back(r.energy_traditional);
  }
  for (const CalibrationRow& r : rows) {
    bytes.push_back(static_cast<double>(r.after_bytes));
    energy.push_back(r.energy_proposed);
  }
  // Normal equation for y = c x: c = sum(w x y) / sum(w x^2), w = 1 or 1/y^2.
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double w = weighting == FitWeighting::Absolute ? 1.0 : 1.0 / (energy[i] * energy[i]);
    num += w * bytes[i] * energy[i];
    den += w * bytes[i] * bytes[i];
  }
  GlobalFit fit;
  fit.coefficient = den > 0.0 ? num / den : 0.0;
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const double r = (fit.coefficient * bytes[i] - energy[i]) / energy[i];
    fit.relative_residuals.push_back(r);
    fit.max_abs_relative_residual = std::max(fit.max_abs_relative_residual, std::abs(r));
  }
  return fit;
}

}  // namespace bsmu
