#include "cli/commands.hpp"

#include "witsopt/witsopt.hpp"

#include <fmt/format.h>
#include "json.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace witsopt::cli {

using nlohmann::ordered_json;

namespace {

constexpr double kGridSlack = 1e-12;

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
  if (used != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("not a finite number: '" + s + "'");
  }
  return v;
}

ModelParams params_of(const RunConfig& c) { return ModelParams::make(c.source_var, c.noise_var); }

void require_powers(const RunConfig& c) {
  if (c.powers.empty()) throw std::invalid_argument("a power grid is required (--P or --grid)");
  for (double p : c.powers) {
    if (!(p >= 0.0)) throw std::invalid_argument("powers must be >= 0");
  }
}

ordered_json params_json(const ModelParams& p) {
  return {{"Q", p.source_var}, {"N", p.noise_var}};
}

ordered_json point_json(const CorrelationPoint& p) {
  return {{"rho2", p.x0_w2}, {"rho3", p.x0_u1}, {"rho4", p.w1_w2}, {"rho5", p.w1_u1},
          {"rho6", p.w2_u1()}};
}

ordered_json nats_json(double nats) {
  return {{"nats", nats}, {"bits", nats_to_bits(nats)}};
}

// Evaluates f and returns its value, or null plus the error text.
template <class F>
ordered_json guarded(F&& f, ordered_json& errors, const char* key) {
  try {
    return f();
  } catch (const Error& e) {
    errors[key] = e.what();
    return nullptr;
  }
}

void write_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw std::invalid_argument("grid must be start:stop:step, got '" + text + "'");
  const double start = parse_double(parts[0]);
  const double stop = parse_double(parts[1]);
  const double step = parse_double(parts[2]);
  if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
  if (stop < start) throw std::invalid_argument("grid stop must be >= start");

  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    double v = start + static_cast<double>(k) * step;
    if (v > stop + kGridSlack) break;
    if (std::abs(v - stop) <= kGridSlack) v = stop;
    grid.push_back(v);
    if (grid.size() > 10'000'000) throw std::invalid_argument("grid has too many points");
  }
  return grid;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_double(item));
  if (out.empty()) throw std::invalid_argument("empty power list");
  return out;
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw std::invalid_argument("format must be csv or json, got '" + s + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  return fmt::format("{:#.9g}", v);
}

// ---------------------------------------------------------------------------

ExitCode cmd_curves(const RunConfig& config, std::ostream& out) {
  const ModelParams params = params_of(config);
  require_powers(config);

  const auto two_point = sweep_two_point(params, config.powers);

  if (config.format == Format::Json) {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < config.powers.size(); ++i) {
      const double p = config.powers[i];
      ordered_json row = {{"P", p},
                          {"S_linear", best_linear_cost(p, params)},
                          {"S_gauss", optimal_gaussian_cost(p, params)},
                          {"S_twopoint", nullptr}};
      if (two_point[i].estimation) row["S_twopoint"] = *two_point[i].estimation;
      rows.push_back(std::move(row));
    }
    ordered_json doc = {{"params", params_json(params)}, {"rows", std::move(rows)}};
    if (const auto w = gaussian_thresholds(params)) {
      doc["thresholds"] = {{"P1", w->low}, {"P2", w->high}};
    } else {
      doc["thresholds"] = nullptr;
    }
    write_json(out, doc);
    return ExitCode::Ok;
  }

  out << "P,S_linear,S_gauss,S_twopoint\n";
  for (std::size_t i = 0; i < config.powers.size(); ++i) {
    const double p = config.powers[i];
    out << format_number(p) << ',' << format_number(best_linear_cost(p, params)) << ','
        << format_number(optimal_gaussian_cost(p, params)) << ',';
    if (two_point[i].estimation) out << format_number(*two_point[i].estimation);
    out << '\n';
  }
  return ExitCode::Ok;
}

ExitCode cmd_verify(const RunConfig& config, std::ostream& out) {
  const ModelParams params = params_of(config);
  require_powers(config);

  BruteForceOptions opts;
  opts.resolution = config.resolution;
  const VerificationReport report =
      verify_optimal_cost(params, config.powers, opts, config.tolerance);

  if (config.format == Format::Csv) {
    out << "P,S_theory,S_oracle,gap,rho2,rho3,rho4,rho5,constraint_nats\n";
    for (const auto& p : report.points) {
      out << format_number(p.power) << ',' << format_number(p.theory) << ','
          << format_number(p.oracle) << ',' << format_number(p.gap) << ','
          << format_number(p.argmin.x0_w2) << ',' << format_number(p.argmin.x0_u1) << ','
          << format_number(p.argmin.w1_w2) << ',' << format_number(p.argmin.w1_u1) << ','
          << format_number(p.constraint_at_argmin) << '\n';
    }
  } else {
    ordered_json points = ordered_json::array();
    for (const auto& p : report.points) {
      ordered_json constraint = nullptr;
      if (!std::isnan(p.constraint_at_argmin)) constraint = p.constraint_at_argmin;
      points.push_back({{"P", p.power},
                        {"S_theory", p.theory},
                        {"S_oracle", p.oracle},
                        {"gap", p.gap},
                        {"argmin_point", point_json(p.argmin)},
                        {"constraint_value_at_argmin", constraint},
                        {"constraint_value_at_argmin_bits",
                         std::isnan(p.constraint_at_argmin)
                             ? ordered_json(nullptr)
                             : ordered_json(nats_to_bits(p.constraint_at_argmin))}});
    }
    write_json(out, {{"params", params_json(params)},
                     {"resolution", config.resolution},
                     {"tolerance", report.tolerance},
                     {"undercut_tolerance", report.undercut_tolerance},
                     {"points", std::move(points)},
                     {"max_gap", report.max_gap},
                     {"pass", report.pass}});
  }
  return report.pass ? ExitCode::Ok : ExitCode::VerificationFailed;
}

ExitCode cmd_simulate(const RunConfig& config, const StrategySpec& req, std::ostream& out) {
  const ModelParams params = params_of(config);

  Strategy strategy;
  if (req.kind == "affine" || req.kind == "timeshare") {
    if (!req.power) throw std::invalid_argument("--strategy " + req.kind + " needs --P");
    if (req.kind == "affine") {
      strategy = AffineStrategy{*req.power};
    } else {
      strategy = TimeShareStrategy{*req.power};
    }
  } else if (req.kind == "twopoint") {
    if (!req.amplitude) throw std::invalid_argument("--strategy twopoint needs --a");
    strategy = TwoPointStrategy{*req.amplitude};
  } else {
    throw std::invalid_argument("unknown strategy '" + req.kind +
                                "' (expected affine, timeshare or twopoint)");
  }

  SimConfig sim;
  sim.samples = config.samples;
  sim.seed = config.seed;
  sim.chunk = config.chunk;
  const SimResult r = simulate(strategy, params, sim);
  const auto [p_theory, s_theory] = strategy_theory(strategy, params);

  auto z = [](double hat, double theory, double se) {
    if (se > 0.0) return (hat - theory) / se;
    return hat == theory ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  };
  const double z_p = z(r.power_hat, p_theory, r.power_se);
  const double z_s = z(r.estimation_hat, s_theory, r.estimation_se);
  const double target = req.kind == "twopoint" ? *req.amplitude : *req.power;

  if (config.format == Format::Json) {
    write_json(out, {{"strategy", req.kind},
                     {req.kind == "twopoint" ? "a" : "P_target", target},
                     {"params", params_json(params)},
                     {"seed", r.seed},
                     {"n", r.samples},
                     {"P_hat", r.power_hat},
                     {"P_se", r.power_se},
                     {"S_hat", r.estimation_hat},
                     {"S_se", r.estimation_se},
                     {"P_theory", p_theory},
                     {"S_theory", s_theory},
                     {"z_P", std::isnan(z_p) ? ordered_json(nullptr) : ordered_json(z_p)},
                     {"z_S", std::isnan(z_s) ? ordered_json(nullptr) : ordered_json(z_s)}});
  } else {
    out << "strategy,target,Q,N,seed,n,P_hat,P_se,S_hat,S_se,P_theory,S_theory,z_P,z_S\n";
    out << req.kind << ',' << format_number(target) << ',' << format_number(params.source_var)
        << ',' << format_number(params.noise_var) << ',' << r.seed << ',' << r.samples << ','
        << format_number(r.power_hat) << ',' << format_number(r.power_se) << ','
        << format_number(r.estimation_hat) << ',' << format_number(r.estimation_se) << ','
        << format_number(p_theory) << ',' << format_number(s_theory) << ','
        << format_number(z_p) << ',' << format_number(z_s) << '\n';
  }
  return ExitCode::Ok;
}

ExitCode cmd_eval(const RunConfig& config, const PointSpec& req, std::ostream& out) {
  const ModelParams params = params_of(config);
  if (config.powers.size() != 1) throw std::invalid_argument("eval needs exactly one --P value");
  const double power = config.powers.front();
  if (!(power >= 0.0)) throw std::invalid_argument("power must be >= 0");
  const CorrelationPoint point = CorrelationPoint::make(req.rho2, req.rho3, req.rho4, req.rho5);

  const ObjectiveTerms terms = objective_terms(point, power, params);
  const FeasibilityCase fc = classify(point, power, params);
  const auto& d = fc.diagnostics;

  ordered_json errors = ordered_json::object();
  auto mi = [&](auto fn, const char* key) {
    return guarded([&] { return nats_json(fn(point, power, params)); }, errors, key);
  };
  auto scalar = [&](auto fn, const char* key) {
    return guarded([&] { return ordered_json(fn(point, power, params)); }, errors, key);
  };

  ordered_json feedback = guarded(
      [&] {
        const FeedbackEvaluation fb = feedback_constraint(point, power, params);
        ordered_json j = nats_json(fb.value);
        j["coefficients"] = {{"W1", fb.w1_coeff}, {"W2", fb.w2_coeff}, {"Y1", fb.y1_coeff}};
        return j;
      },
      errors, "feedback_constraint");

  ordered_json doc = {
      {"params", params_json(params)},
      {"P", power},
      {"point", point_json(point)},
      {"T1", terms.t1},
      {"T2", terms.t2},
      {"f1", terms.f1},
      {"f", terms.f ? ordered_json(*terms.f) : ordered_json(nullptr)},
      {"case", std::string(to_string(fc.tag))},
      {"constraints",
       {{"aux_excess", d.aux_excess},
        {"u1_excess", d.u1_excess},
        {"A", {{"value", d.det_k}, {"holds", d.a}}},
        {"B", {{"value", d.det_k2}, {"holds", d.b}}},
        {"C1", {{"value", d.t1_minus_t2}, {"holds", d.c1}}},
        {"D1", {{"value", d.t2}, {"holds", d.d1}}},
        {"C2", {{"value", 0.0 - d.t1_minus_t2}, {"holds", d.c2}}},
        {"D2", {{"value", 0.0 - d.t2}, {"holds", d.d2}}}}},
      {"info_constraint",
       {{"closed_form", mi(info_constraint_value, "info_closed_form")},
        {"log_det", mi(info_constraint_via_mi, "info_log_det")},
        {"chain_rule", mi(info_constraint_via_chain_rule, "info_chain_rule")}}},
      {"estimation_cost",
       {{"closed_form", scalar(estimation_cost, "estimation_closed_form")},
        {"schur", scalar(estimation_cost_via_schur, "estimation_schur")}}},
      {"feedback_constraint", std::move(feedback)},
  };
  if (!errors.empty()) doc["errors"] = std::move(errors);

  if (config.format == Format::Json) {
    write_json(out, doc);
    return ExitCode::Ok;
  }
  // flat key,value listing
  out << "key,value\n";
  const ordered_json flat = doc.flatten();
  for (const auto& [key, value] : flat.items()) {
    out << key << ',';
    if (value.is_number()) {
      out << format_number(value.get<double>());
    } else if (value.is_string()) {
      out << value.get<std::string>();
    } else if (!value.is_null()) {
      out << value.dump();
    }
    out << '\n';
  }
  return ExitCode::Ok;
}

}  // namespace witsopt::cli
