#pragma once

// Subcommand implementations behind the witsopt executable. Each command
// writes its report to `out` and returns the process exit code:
// 0 success, 1 argument/config error, 2 verification failure.

#include "witsopt/gausscore.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace witsopt::cli {

enum class ExitCode : int { Ok = 0, BadArguments = 1, VerificationFailed = 2 };

enum class Format { Csv, Json };

struct RunConfig {
  double source_var = 0.8;
  double noise_var = 0.1;
  std::vector<double> powers;  // from --P or --grid
  double resolution = 0.02;
  double tolerance = 5e-3;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t chunk = 65536;
  std::string out;  // empty = stdout
  Format format = Format::Csv;
};

/// "start:stop:step", inclusive of stop within 1e-12. Throws std::invalid_argument.
std::vector<double> parse_grid(const std::string& text);
/// Comma-separated list of numbers. Throws std::invalid_argument.
std::vector<double> parse_list(const std::string& text);
Format parse_format(const std::string& s);

/// Floats in CSV output: 9 significant digits, trailing zeros kept.
std::string format_number(double v);

ExitCode cmd_curves(const RunConfig& config, std::ostream& out);
ExitCode cmd_verify(const RunConfig& config, std::ostream& out);

struct StrategySpec {
  std::string kind;  // affine | timeshare | twopoint
  std::optional<double> power;
  std::optional<double> amplitude;
};
ExitCode cmd_simulate(const RunConfig& config, const StrategySpec& strategy, std::ostream& out);

struct PointSpec {
  double rho2 = 0.0, rho3 = 0.0, rho4 = 0.0, rho5 = 0.0;
};
ExitCode cmd_eval(const RunConfig& config, const PointSpec& point, std::ostream& out);

}  // namespace witsopt::cli
