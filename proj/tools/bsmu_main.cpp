// Copyright 2026 The BSMU Authors
// SPDX-License-Identifier: Apache-2.0

// bsmu: run the monitoring pipeline, inspect a calibration table, or
// re-render a saved report.
//
// Exit codes: 0 success, 1 config error, 2 pipeline failure.

#include "bsmu/energy_model.hpp"
#include "bsmu/errors.hpp"
#include "bsmu/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kPipelineFailure = 2;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bsmu::Error("cannot read " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw bsmu::Error("cannot write " + path.string());
}

struct RunArgs {
  std::string config_path;
  std::optional<std::uint32_t> workers;
  std::optional<std::uint64_t> seed;
  std::string format;
  std::string out_dir;
};

int cmd_run(const RunArgs& args) {
  bsmu::PipelineConfig config;
  try {
    config = bsmu::parse_config(read_text(args.config_path));
    if (!config.calibration_path.empty() && std::filesystem::path(config.calibration_path).is_relative()) {
      config.calibration_path =
          (std::filesystem::path(args.config_path).parent_path() / config.calibration_path).string();
    }
    if (args.workers) config.worker_count = *args.workers;
    if (args.seed) {
      // One stream per sensor, derived from the shared seed.
      for (auto& s : config.sensors) s.spec.seed = *args.seed + bsmu::code(s.spec.sensor_type);
    }
    if (!args.format.empty()) config.format = *bsmu::report_format_from_name(args.format);
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    bsmu::validate(config);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const bsmu::PipelineReport report = bsmu::run_pipeline(config);
    std::cout << bsmu::emit_report(report, config.format);
    if (!config.output_dir.empty()) {
      const std::filesystem::path root(config.output_dir);
      write_text(root / "report.txt", bsmu::emit_report(report, bsmu::ReportFormat::Text));
      write_text(root / "report.kv", bsmu::emit_report(report, bsmu::ReportFormat::KeyValue));
    }
  } catch (const std::exception& e) {
    std::cerr << "pipeline failure: " << e.what() << "\n";
    return kPipelineFailure;
  }
  return kOk;
}

int cmd_calibrate(const std::string& path) {
  std::vector<bsmu::CalibrationRow> rows;
  bsmu::EnergyParams params;
  try {
    rows = path.empty() ? bsmu::default_calibration_rows() : bsmu::load_calibration_file(path);
    params = bsmu::calibrate(rows);
  } catch (const std::exception& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return kConfigError;
  }

  std::printf("%-14s %14s %14s %16s %16s %9s\n", "sensor", "alpha/byte", "beta/byte", "traditional",
              "proposed", "savings");
  for (const auto& r : rows) {
    const double trad = bsmu::energy_traditional(params, r.sensor_type, r.before_bytes);
    const double prop = bsmu::energy_proposed(params, r.sensor_type, r.after_bytes);
    std::printf("%-14s %14.6e %14.6e %16.6e %16.6e %9.4f\n", std::string(bsmu::display_name(r.sensor_type)).c_str(),
                params.alpha(r.sensor_type), params.beta(r.sensor_type), trad, prop,
                bsmu::savings_fraction(params, r.sensor_type, r.before_bytes, r.after_bytes));
  }
  for (auto w : {bsmu::FitWeighting::Absolute, bsmu::FitWeighting::Relative}) {
    const bsmu::GlobalFit fit = bsmu::fit_global_coefficient(rows, w);
    std::printf("single shared coefficient (%s least squares): %.6e per byte, worst relative residual %.1f%%\n",
                w == bsmu::FitWeighting::Absolute ? "absolute" : "relative", fit.coefficient,
                100.0 * fit.max_abs_relative_residual);
  }
  return kOk;
}

int cmd_report(const std::string& path, const std::string& format) {
  try {
    const bsmu::PipelineReport report = bsmu::parse_report(read_text(path));
    const auto f = format.empty() ? bsmu::ReportFormat::Text : *bsmu::report_format_from_name(format);
    std::cout << bsmu::emit_report(report, f);
  } catch (const std::exception& e) {
    std::cerr << "report error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Base station monitoring unit: sensing, data reduction and transmission energy"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run the pipeline described by a config file");
  run->add_option("config", run_args.config_path, "Pipeline config (section.key=value)")->required();
  run->add_option("--workers", run_args.workers, "Map/reduce worker threads")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_args.seed, "Base seed; sensor k uses seed + k");
  run->add_option("--format", run_args.format, "Report format")->check(CLI::IsMember({"text", "kv"}));
  run->add_option("--out", run_args.out_dir, "Directory for datasets, ledger, block store and reports");

  std::string calibration_path;
  auto* cal = app.add_subcommand("calibrate", "Fit and check the energy model for a calibration table");
  cal->add_option("file", calibration_path, "Calibration table (built-in table if omitted)");

  std::string report_path, report_format;
  auto* rep = app.add_subcommand("report", "Re-render a saved key/value report");
  rep->add_option("file", report_path, "Report written with --format kv")->required();
  rep->add_option("--format", report_format, "Output format")->check(CLI::IsMember({"text", "kv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(run_args);
  if (*cal) return cmd_calibrate(calibration_path);
  return cmd_report(report_path, report_format);
}
