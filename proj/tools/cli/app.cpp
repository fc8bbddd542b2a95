#include "cli/app.hpp"

#include "cli/commands.hpp"
#include "witsopt/errors.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

namespace witsopt::cli {

namespace {

constexpr const char* kDescription =
    "Optimal Gaussian costs of the vector Witsenhausen problem "
    "(causal encoder, non-causal decoder).";

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{kDescription, "witsopt"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a 'key = value' file; flags override it");

  RunConfig config;
  std::string p_list;
  std::string grid;
  std::string format;  // empty: csv for curves, json otherwise

  app.add_option("--Q", config.source_var, "Source variance Q (> 0)")->capture_default_str();
  app.add_option("--N", config.noise_var, "Channel-noise variance N (> 0)")->capture_default_str();
  app.add_option("--P", p_list, "Power, or comma-separated list of powers");
  app.add_option("--grid", grid, "Power grid start:stop:step (inclusive)");
  app.add_option("--resolution", config.resolution, "Oracle grid step in (0, 0.1]")
      ->capture_default_str();
  app.add_option("--tolerance", config.tolerance, "Verification tolerance")->capture_default_str();
  app.add_option("--samples", config.samples, "Monte Carlo sample count")->capture_default_str();
  app.add_option("--seed", config.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--chunk", config.chunk, "Samples per parallel chunk")->capture_default_str();
  app.add_option("--out", config.out, "Output file (default: stdout)");
  app.add_option("--format", format, "Output format: csv or json (default: csv for curves, json otherwise)");

  auto* curves = app.add_subcommand("curves", "Emit S_linear, S_gauss and S_twopoint over a power grid");
  auto* verify = app.add_subcommand("verify", "Check the closed-form optimum against the grid oracle");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of a concrete strategy");
  auto* eval = app.add_subcommand("eval", "Evaluate every closed form at one correlation point");

  StrategySpec strategy;
  double amplitude = 0.0;
  simulate->add_option("--strategy", strategy.kind, "affine | timeshare | twopoint")->required();
  auto* amp_opt = simulate->add_option("--a", amplitude, "Two-point amplitude (>= 0)");

  PointSpec point;
  eval->add_option("--rho2", point.rho2, "Corr(X0, W2)");
  eval->add_option("--rho3", point.rho3, "Corr(X0, U1)");
  eval->add_option("--rho4", point.rho4, "Corr(W1, W2)");
  eval->add_option("--rho5", point.rho5, "Corr(W1, U1)");

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());  // CLI11 consumes a reversed vector
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "witsopt: " << e.what() << '\n';
    return static_cast<int>(ExitCode::BadArguments);
  }

  try {
    config.format = !format.empty() ? parse_format(format) : (*curves ? Format::Csv : Format::Json);
    if (!p_list.empty() && !grid.empty()) {
      throw std::invalid_argument("give either --P or --grid, not both");
    }
    if (!grid.empty()) config.powers = parse_grid(grid);
    if (!p_list.empty()) config.powers = parse_list(p_list);

    std::ofstream file;
    if (!config.out.empty()) {
      file.open(config.out, std::ios::binary | std::ios::trunc);
      if (!file) throw std::invalid_argument("cannot open output file '" + config.out + "'");
    }
    std::ostream& sink = config.out.empty() ? out : file;

    ExitCode code = ExitCode::Ok;
    if (*curves) {
      code = cmd_curves(config, sink);
    } else if (*verify) {
      code = cmd_verify(config, sink);
    } else if (*simulate) {
      if (config.powers.size() > 1) throw std::invalid_argument("simulate takes a single --P");
      if (!config.powers.empty()) strategy.power = config.powers.front();
      if (amp_opt->count() > 0) strategy.amplitude = amplitude;
      code = cmd_simulate(config, strategy, sink);
    } else if (*eval) {
      code = cmd_eval(config, point, sink);
    }
    sink.flush();
    return static_cast<int>(code);
  } catch (const witsopt::Error& e) {
    err << "witsopt: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "witsopt: " << e.what() << '\n';
  }
  return static_cast<int>(ExitCode::BadArguments);
}

}  // namespace witsopt::cli
