// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

#include "bsmu/energy_model.hpp"
#include "bsmu/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

namespace bsmu {
namespace {

struct Printed {
  SensorType type;
  std::uint64_t before, after;
  double traditional, proposed;
};

constexpr Printed kPrinted[] = {
    {SensorType::Moisture, 5000, 500, 7.99e-3, 0.21e-3},
    {SensorType::DieselLevel, 5234, 745, 8.654e-3, 2.56e-3},
    {SensorType::Smoke, 3975, 478, 6.78e-3, 1.24e-3},
    {SensorType::Temperature, 5421, 324, 9.21e-3, 1.23e-3},
    {SensorType::Pressure, 4951, 415, 8.96e-3, 1.87e-3},
};

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

TEST(Calibrate, ReproducesPrintedEnergies) {
  const EnergyParams p = calibrate(default_calibration_rows());
  ASSERT_TRUE(p.calibrated());
  for (const Printed& row : kPrinted) {
    EXPECT_LT(rel(energy_traditional(p, row.type, row.before), row.traditional), 1e-12);
    EXPECT_LT(rel(energy_proposed(p, row.type, row.after), row.proposed), 1e-12);
    EXPECT_EQ(energy_for(p, TransmitMode::Traditional, row.type, row.before),
              energy_traditional(p, row.type, row.before));
    EXPECT_EQ(energy_for(p, TransmitMode::Proposed, row.type, row.after),
              energy_proposed(p, row.type, row.after));
  }
}

TEST(Calibrate, Coefficients) {
  const EnergyParams p = calibrate(default_calibration_rows());
  EXPECT_NEAR(p.alpha(SensorType::Moisture), 1.598e-6, 1e-15);
  EXPECT_NEAR(p.beta(SensorType::Moisture), 4.2e-7, 1e-15);
  EXPECT_DOUBLE_EQ(p.alpha(SensorType::Smoke), 6.78e-3 / 3975);
  EXPECT_DOUBLE_EQ(p.beta(SensorType::Pressure), 1.87e-3 / 415);
  EXPECT_EQ(energy_traditional(p, SensorType::Smoke, 0), 0.0);
  EXPECT_EQ(energy_proposed(p, SensorType::Smoke, 0), 0.0);
  EXPECT_FALSE(EnergyParams{}.calibrated());
}

TEST(Calibrate, Rejections) {
  auto rows = default_calibration_rows();
  rows.pop_back();
  EXPECT_THROW(calibrate(rows), MissingSensor);

  rows = default_calibration_rows();
  rows.push_back(rows.front());
  EXPECT_THROW(calibrate(rows), MissingSensor);

  for (int field = 0; field < 4; ++field) {
    rows = default_calibration_rows();
    switch (field) {
      case 0: rows[1].before_bytes = 0; break;
      case 1: rows[1].after_bytes = 0; break;
      case 2: rows[1].energy_traditional = -1.0; break;
      case 3: rows[1].energy_proposed = 0.0; break;
    }
    EXPECT_THROW(calibrate(rows), NonPositiveValue) << field;
  }
}

TEST(Energy, MonotoneInBytes) {
  const EnergyParams p = calibrate(default_calibration_rows());
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto t = static_cast<SensorType>(rng() % 5);
    const std::uint64_t a = rng() % 100000, b = a + rng() % 100000;
    EXPECT_LE(energy_traditional(p, t, a), energy_traditional(p, t, b));
    EXPECT_LE(energy_proposed(p, t, a), energy_proposed(p, t, b));
  }
}

TEST(Savings, DerivedValuesAndOrdering) {
  const EnergyParams p = calibrate(default_calibration_rows());
  const std::pair<SensorType, double> want[] = {
      {SensorType::Moisture, 0.9737},    {SensorType::DieselLevel, 0.7042},
      {SensorType::Smoke, 0.8171},       {SensorType::Temperature, 0.8664},
      {SensorType::Pressure, 0.7913},
  };
  std::array<double, 5> s{};
  for (const Printed& row : kPrinted) {
    s[index_of(row.type)] = savings_fraction(p, row.type, row.before, row.after);
    EXPECT_NEAR(s[index_of(row.type)], 1.0 - row.proposed / row.traditional, 1e-12);
  }
  for (const auto& [t, v] : want) EXPECT_NEAR(s[index_of(t)], v, 1e-4) << display_name(t);
  EXPECT_GT(s[index_of(SensorType::Moisture)], s[index_of(SensorType::Temperature)]);
  EXPECT_GT(s[index_of(SensorType::Temperature)], s[index_of(SensorType::Smoke)]);
  EXPECT_GT(s[index_of(SensorType::Smoke)], s[index_of(SensorType::Pressure)]);
  EXPECT_GT(s[index_of(SensorType::Pressure)], s[index_of(SensorType::DieselLevel)]);
}

TEST(Breakdown, Shares) {
  const auto uniform = breakdown(1.0, {});
  for (double v : uniform) EXPECT_DOUBLE_EQ(v, 0.2);

  const auto skewed = breakdown(7.99e-3, {{0.6, 0.1, 0.1, 0.15, 0.05}});
  EXPECT_DOUBLE_EQ(skewed[0], 0.6 * 7.99e-3);
  EXPECT_DOUBLE_EQ(skewed[4], 0.05 * 7.99e-3);
  double sum = 0;
  for (double v : skewed) sum += v;
  EXPECT_NEAR(sum, 7.99e-3, 1e-15);

  const auto single = breakdown(3.0, {{0, 0, 1, 0, 0}});
  EXPECT_EQ(single, (std::array<double, 5>{0, 0, 3.0, 0, 0}));

  EXPECT_THROW(breakdown(1.0, {{0.5, 0.5, 0.5, 0, 0}}), InvalidShares);
  EXPECT_THROW(breakdown(1.0, {{1.1, -0.1, 0, 0, 0}}), InvalidShares);
  EXPECT_EQ(component_name(BsComponent::PowerAmplifier).empty(), false);
}

TEST(CalibrationFile, ParseAndFormat) {
  const auto rows = parse_calibration(default_calibration_text());
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].sensor_type, kPrinted[i].type);
    EXPECT_EQ(rows[i].before_bytes, kPrinted[i].before);
    EXPECT_EQ(rows[i].after_bytes, kPrinted[i].after);
    EXPECT_EQ(rows[i].energy_traditional, kPrinted[i].traditional);
    EXPECT_EQ(rows[i].energy_proposed, kPrinted[i].proposed);
  }
  const auto again = parse_calibration(format_calibration(rows));
  ASSERT_EQ(again.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(again[i].energy_traditional, rows[i].energy_traditional);
    EXPECT_EQ(again[i].energy_proposed, rows[i].energy_proposed);
  }
}

TEST(CalibrationFile, ShippedFileMatchesPrintedTable) {
  const auto rows = load_calibration_file(std::string(BSMU_DATA_DIR) + "/table3_calibration.txt");
  ASSERT_EQ(rows.size(), 5u);
  const EnergyParams p = calibrate(rows);
  for (const Printed& row : kPrinted) {
    EXPECT_LT(rel(energy_traditional(p, row.type, row.before), row.traditional), 1e-12);
    EXPECT_LT(rel(energy_proposed(p, row.type, row.after), row.proposed), 1e-12);
  }
}

TEST(CalibrationFile, Rejections) {
  EXPECT_THROW(parse_calibration(""), ParseError);
  EXPECT_THROW(parse_calibration("Moisture,5000,500,1,1\n"), ParseError);
  const std::string head = std::string(kCalibrationMagic) + "\n";
  EXPECT_THROW(parse_calibration(head + "Moisture,5000,500,1\n"), ParseError);
  EXPECT_THROW(parse_calibration(head + "Wind,5000,500,1,1\n"), ParseError);
  EXPECT_THROW(parse_calibration(head + "Moisture,50x0,500,1,1\n"), ParseError);
  try {
    parse_calibration(head + "Moisture,5000,500,1,1\nSmoke,1,2,3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  EXPECT_THROW(load_calibration_file("/nonexistent/bsmu.cal"), std::runtime_error);
}

// Independent minimiser: ternary search on the convex one-parameter loss.
double ternary_fit(bool relative) {
  auto loss = [relative](double c) {
    double s = 0;
    for (const Printed& row : kPrinted) {
      for (auto [b, e] : {std::pair{double(row.before), row.traditional},
                          std::pair{double(row.after), row.proposed}}) {
        const double r = relative ? (c * b - e) / e : (c * b - e);
        s += r * r;
      }
    }
    return s;
  };
  double lo = 0.0, hi = 1e-4;
  for (int i = 0; i < 400; ++i) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (loss(m1) < loss(m2)) hi = m2; else lo = m1;
  }
  return (lo + hi) / 2;
}

TEST(GlobalFit, MatchesIndependentMinimiser) {
  const auto rows = default_calibration_rows();
  for (auto [w, relative] : {std::pair{FitWeighting::Absolute, false}, std::pair{FitWeighting::Relative, true}}) {
    const GlobalFit fit = fit_global_coefficient(rows, w);
    // A flat minimum pins the argmin only to about sqrt(epsilon).
    EXPECT_LT(rel(fit.coefficient, ternary_fit(relative)), 1e-6);
    ASSERT_EQ(fit.relative_residuals.size(), 10u);
    double worst = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      const double r0 = (fit.coefficient * kPrinted[i].before - kPrinted[i].traditional) / kPrinted[i].traditional;
      const double r1 = (fit.coefficient * kPrinted[i].after - kPrinted[i].proposed) / kPrinted[i].proposed;
      EXPECT_NEAR(fit.relative_residuals[i], r0, 1e-12);
      EXPECT_NEAR(fit.relative_residuals[5 + i], r1, 1e-12);
      worst = std::max({worst, std::abs(r0), std::abs(r1)});
    }
    EXPECT_NEAR(fit.max_abs_relative_residual, worst, 1e-12);
  }
}

TEST(GlobalFit, SingleCoefficientCannotExplainTable) {
  const auto rows = default_calibration_rows();
  EXPECT_GT(fit_global_coefficient(rows, FitWeighting::Absolute).max_abs_relative_residual, 0.10);
  EXPECT_GT(fit_global_coefficient(rows, FitWeighting::Relative).max_abs_relative_residual, 0.10);
}

TEST(GlobalFit, ExactForProportionalData) {
  std::vector<CalibrationRow> rows;
  for (const Printed& row : kPrinted) {
    rows.push_back({row.type, row.before, row.after, 2e-6 * row.before, 2e-6 * row.after});
  }
  const GlobalFit fit = fit_global_coefficient(rows);
  EXPECT_NEAR(fit.coefficient, 2e-6, 1e-18);
  EXPECT_LT(fit.max_abs_relative_residual, 1e-12);
}

TEST(Modes, Names) {
  EXPECT_EQ(mode_name(TransmitMode::Traditional), "traditional");
  EXPECT_EQ(mode_from_name("proposed"), TransmitMode::Proposed);
  EXPECT_FALSE(mode_from_name("bogus"));
}

}  // namespace
}  // namespace bsmu
