// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

/// @file energy_model.hpp
/// @brief Per-sensor, per-mode linear transmission energy model calibrated
/// from a before/after size and energy table.
///
/// Energies are kept in the units the calibration table prints them in; the
/// model is unit-agnostic.

#pragma once

#include "bsmu/sensor_ingest.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bsmu {

enum class TransmitMode : std::uint8_t { Traditional, Proposed };

std::string_view mode_name(TransmitMode mode) noexcept;
std::optional<TransmitMode> mode_from_name(std::string_view name) noexcept;

struct CalibrationRow {
  SensorType sensor_type = SensorType::Moisture;
  std::uint64_t before_bytes = 0;
  std::uint64_t after_bytes = 0;
  double energy_traditional = 0.0;
  double energy_proposed = 0.0;
};

/// Per-byte coefficients: alpha for raw transmission, beta for reduced.
class EnergyParams {
 public:
  struct Coefficients {
    double alpha = 0.0;
    double beta = 0.0;
  };

  EnergyParams() = default;

  bool calibrated() const noexcept { return calibrated_; }
  const Coefficients& at(SensorType t) const noexcept { return coeffs_[index_of(t)]; }
  double alpha(SensorType t) const noexcept { return at(t).alpha; }
  double beta(SensorType t) const noexcept { return at(t).beta; }

 private:
  friend EnergyParams calibrate(const std::vector<CalibrationRow>& rows);
  std::array<Coefficients, 5> coeffs_{};
  bool calibrated_ = false;
};

/// alpha = energy_traditional / before_bytes, beta = energy_proposed / after_bytes.
/// @throws MissingSensor unless every sensor has exactly one row;
/// NonPositiveValue on zero or negative sizes or energies.
EnergyParams calibrate(const std::vector<CalibrationRow>& rows);

double energy_traditional(const EnergyParams& params, SensorType sensor, std::uint64_t bytes) noexcept;
double energy_proposed(const EnergyParams& params, SensorType sensor, std::uint64_t bytes) noexcept;
double energy_for(const EnergyParams& params, TransmitMode mode, SensorType sensor,
                  std::uint64_t bytes) noexcept;

/// 1 - proposed(after) / traditional(before).
double savings_fraction(const EnergyParams& params, SensorType sensor, std::uint64_t before_bytes,
                        std::uint64_t after_bytes) noexcept;

enum class BsComponent : std::uint8_t { PowerAmplifier, RfCircuitry, Baseband, Cooling, Other };
inline constexpr std::size_t kComponentCount = 5;
std::string_view component_name(BsComponent c) noexcept;

struct ComponentBreakdown {
  std::array<double, kComponentCount> shares{0.2, 0.2, 0.2, 0.2, 0.2};
};

/// @throws InvalidShares on negative shares or a sum off 1 by more than 1e-9.
std::array<double, kComponentCount> breakdown(double energy, const ComponentBreakdown& shares);

// -- Calibration table file -------------------------------------------------
//
//   # comments and blank lines are ignored
//   bsmu-calibration v1
//   Moisture,5000,500,7.99e-3,0.21e-3
//   ...

inline constexpr std::string_view kCalibrationMagic = "bsmu-calibration v1";

/// The five-row before/after table the project ships with.
std::vector<CalibrationRow> default_calibration_rows();
std::string default_calibration_text();

/// @throws ParseError with line context.
std::vector<CalibrationRow> parse_calibration(std::string_view text);
std::string format_calibration(const std::vector<CalibrationRow>& rows);
/// @throws ParseError, std::runtime_error if unreadable.
std::vector<CalibrationRow> load_calibration_file(const std::string& path);

// -- Single-coefficient fit -------------------------------------------------

enum class FitWeighting {
  /// Minimise sum (c*b - E)^2.
  Absolute,
  /// Minimise sum ((c*b - E) / E)^2.
  Relative,
};

struct GlobalFit {
  double coefficient = 0.0;
  /// (c*b - E) / E for each of the 2N points: traditional rows first, then proposed.
  std::vector<double> relative_residuals;
  double max_abs_relative_residual = 0.0;
};

/// Fits one per-byte coefficient shared by every sensor and both modes.
GlobalFit fit_global_coefficient(const std::vector<CalibrationRow>& rows,
                                 FitWeighting weighting = FitWeighting::Absolute);

}  // namespace bsmu
