#include "witsopt/optimizer.hpp"

#include "nelder_mead.hpp"
#include "witsopt/errors.hpp"
#include "witsopt/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace witsopt {

namespace {

constexpr double kIneqTol = 1e-12;
constexpr double kUnitTol = 1e-12;  // |1 - rho4^2| below this counts as rho4^2 = 1

constexpr std::array<Var, 3> kDecoderView{Var::W1, Var::W2, Var::Y1};

void check_inputs(double power, const ModelParams& params) {
  ModelParams::make(params.source_var, params.noise_var);
  if (!(std::isfinite(power) && power >= 0.0)) {
    throw InvalidParams("power must be finite and >= 0");
  }
}

CorrelationPoint validated(const CorrelationPoint& p) {
  return CorrelationPoint::make(p.x0_w2, p.x0_u1, p.w1_w2, p.w1_u1);
}

// Closed-form cost without validation or exceptions; NaN when the
// denominator vanishes. Shared by the grid scan and the public entry point.
inline double cost_kernel(double r2sq, double r3, double r4sq, double r5sq, double power,
                          double q, double n) {
  const double s4 = 1.0 - r4sq;
  if (std::abs(s4) < kUnitTol) return n;
  const double f1 = -power * r2sq * r3 * r3 -
                    (q + 2.0 * r3 * std::sqrt(power * q)) * (r2sq + r4sq - 1.0) +
                    power * s4 * (1.0 - r5sq);
  const double den = s4 * n + f1;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return n * f1 / den;
}

bool better(double cost, const CorrelationPoint& pt, double best_cost,
            const CorrelationPoint& best_pt) {
  if (cost < best_cost) return true;
  return cost == best_cost && lex_less(pt, best_pt);
}

std::vector<double> make_grid(double resolution) {
  const auto steps = static_cast<std::size_t>(std::floor(2.0 / resolution + 1e-9));
  std::vector<double> g(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) g[k] = -1.0 + static_cast<double>(k) * resolution;
  if (std::abs(g.back() - 1.0) < 1e-9) g.back() = 1.0;
  g.front() = -1.0;
  return g;
}

}  // namespace

// ---------------------------------------------------------------------------
// closed forms

ObjectiveTerms objective_terms(const CorrelationPoint& point, double power,
                               const ModelParams& params) {
  const CorrelationPoint p = validated(point);
  check_inputs(power, params);
  const double q = params.source_var;
  const double n = params.noise_var;
  const double r2sq = p.x0_w2 * p.x0_w2;
  const double r3 = p.x0_u1;
  const double r4sq = p.w1_w2 * p.w1_w2;
  const double r5sq = p.w1_u1 * p.w1_u1;
  const double cross = 2.0 * r3 * std::sqrt(q * power);
  const double aux = -1.0 + r2sq + r4sq;

  ObjectiveTerms t;
  t.t1 = (power + q + n + cross) * aux;
  t.t2 = n * r2sq + power * r2sq * (1.0 - r3 * r3) - power * r5sq * (1.0 - r4sq);
  t.f1 = -power * r2sq * r3 * r3 - (q + cross) * aux + power * (1.0 - r4sq) * (1.0 - r5sq);
  if (std::abs(1.0 - r4sq) >= kUnitTol) t.f = t.f1 / (1.0 - r4sq);
  return t;
}

double info_constraint_value(const CorrelationPoint& point, double power,
                             const ModelParams& params) {
  const ObjectiveTerms t = objective_terms(point, power, params);
  const double denom = t.t1 - t.t2;
  if (t.t1 == 0.0 || denom == 0.0 || (t.t1 > 0.0) != (denom > 0.0)) {
    throw UndefinedLogArgument("T1 / (T1 - T2) is not positive (T1 = " + std::to_string(t.t1) +
                               ", T2 = " + std::to_string(t.t2) + ")");
  }
  // 0.5 ln(T1 / (T1 - T2)) = -0.5 ln(1 - T2/T1)
  return 0.0 - 0.5 * std::log1p(-t.t2 / t.t1);
}

double estimation_cost(const CorrelationPoint& point, double power, const ModelParams& params) {
  const CorrelationPoint p = validated(point);
  check_inputs(power, params);
  const double s =
      cost_kernel(p.x0_w2 * p.x0_w2, p.x0_u1, p.w1_w2 * p.w1_w2, p.w1_u1 * p.w1_u1, power,
                  params.source_var, params.noise_var);
  if (std::isnan(s)) {
    throw DegenerateDenominator("(1 - rho4^2) N + f1 vanishes at a covariance boundary");
  }
  return s;
}

double info_constraint_via_mi(const CorrelationPoint& point, double power,
                              const ModelParams& params) {
  const CovMatrix cov = build_joint_covariance(point, power, params);
  return gaussian_mi(cov, {Var::W1, Var::W2}, {Var::Y1}) -
         conditional_mi(cov, {Var::W2}, {Var::X0}, {Var::W1});
}

double info_constraint_via_chain_rule(const CorrelationPoint& point, double power,
                                      const ModelParams& params) {
  const CovMatrix cov = build_joint_covariance(point, power, params);
  return gaussian_mi(cov, {Var::W1}, {Var::Y1}) -
         conditional_mi(cov, {Var::W2}, {Var::X0}, {Var::W1, Var::Y1});
}

double estimation_cost_via_schur(const CorrelationPoint& point, double power,
                                 const ModelParams& params) {
  const CovMatrix cov = build_joint_covariance(point, power, params);
  return schur_mmse(cov, Var::X1, kDecoderView);
}

// ---------------------------------------------------------------------------
// classification

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::Case1: return "Case1";
    case Regime::Case2: return "Case2";
    case Regime::Infeasible: return "Infeasible";
  }
  return "?";
}

std::string_view to_string(Branch b) noexcept {
  switch (b) {
    case Branch::PgeQ: return "PgeQ";
    case Branch::Interior: return "Interior";
    case Branch::Boundary: return "Boundary";
    case Branch::Case1Limit: return "Case1Limit";
  }
  return "?";
}

FeasibilityCase classify(const CorrelationPoint& point, double power, const ModelParams& params) {
  const CorrelationPoint p = validated(point);
  const ObjectiveTerms t = objective_terms(p, power, params);
  const double q = params.source_var;
  const double n = params.noise_var;

  ConstraintDiagnostics d;
  d.aux_excess = -1.0 + p.x0_w2 * p.x0_w2 + p.w1_w2 * p.w1_w2;
  d.u1_excess = -1.0 + p.x0_u1 * p.x0_u1 + p.w1_u1 * p.w1_u1;
  d.det_k = q * power * d.aux_excess * d.u1_excess;
  d.det_k2 = q * d.aux_excess * (power * d.u1_excess - n);
  d.t1_minus_t2 = t.t1 - t.t2;
  d.t2 = t.t2;
  d.a = d.det_k >= -kIneqTol;
  d.b = d.det_k2 >= -kIneqTol;
  d.c1 = d.t1_minus_t2 >= -kIneqTol;
  d.d1 = d.t2 >= -kIneqTol;
  d.c2 = d.t1_minus_t2 <= kIneqTol;
  d.d2 = d.t2 <= kIneqTol;

  FeasibilityCase out;
  out.diagnostics = d;
  out.case1 = d.aux_excess >= -kIneqTol && power > 0.0 &&
              d.u1_excess - n / power >= -kIneqTol && d.d1;
  out.case2 = d.aux_excess <= kIneqTol && d.u1_excess <= kIneqTol && d.d2;
  out.tag = out.case2 ? Regime::Case2 : (out.case1 ? Regime::Case1 : Regime::Infeasible);
  return out;
}

// ---------------------------------------------------------------------------
// analytic optimiser

Optimum analytic_optimum(double power, const ModelParams& params) {
  check_inputs(power, params);
  const double q = params.source_var;
  const double n = params.noise_var;

  Optimum opt;
  if (power == 0.0) {
    // U1 vanishes; only the rho3 = -1 boundary survives
    opt.point = CorrelationPoint{0.0, -1.0, 0.0, 0.0};
    opt.branch = Branch::Boundary;
    opt.estimation = q * n / (q + n);
    opt.constraint_value = info_constraint_value(opt.point, power, params);
    return opt;
  }

  // rho2 making T2 vanish for the given rho3 (rho4 = 0, rho5^2 = 1 - rho3^2)
  auto binding_rho2 = [&](double r3) {
    const double slack = std::max(0.0, 1.0 - r3 * r3);
    return std::sqrt(power * slack / (n + power * slack));
  };

  if (power >= q) {
    const double r3 = -std::sqrt(q / power);
    opt.point = CorrelationPoint{binding_rho2(r3), r3, 0.0, std::sqrt(std::max(0.0, 1.0 - r3 * r3))};
    opt.branch = Branch::PgeQ;
    opt.estimation = 0.0;
  } else if (const auto window = gaussian_thresholds(params);
             window && power >= window->low && power <= window->high) {
    const double r3 = std::max(-1.0, -(power + n) / std::sqrt(q * power));
    opt.point = CorrelationPoint{binding_rho2(r3), r3, 0.0, std::sqrt(std::max(0.0, 1.0 - r3 * r3))};
    opt.branch = Branch::Interior;
    opt.estimation = n * (q - n - power) / q;
  } else {
    opt.point = CorrelationPoint{0.0, -1.0, 0.0, 0.0};
    opt.branch = Branch::Boundary;
    const double gap = std::sqrt(q) - std::sqrt(power);
    opt.estimation = n * gap * gap / (n + gap * gap);
  }
  opt.constraint_value = info_constraint_value(opt.point, power, params);
  return opt;
}

// ---------------------------------------------------------------------------
// brute-force oracle

CorrelationPoint project_case2(const CorrelationPoint& point, double power,
                               const ModelParams& params) {
  auto clip = [](double v) { return std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0); };
  double r2 = clip(point.x0_w2);
  double r3 = clip(point.x0_u1);
  double r4 = clip(point.w1_w2);
  double r5 = clip(point.w1_u1);

  if (const double norm = std::hypot(r2, r4); norm > 1.0) {
    r2 /= norm;
    r4 /= norm;
  }
  if (const double norm = std::hypot(r3, r5); norm > 1.0) {
    r3 /= norm;
    r5 /= norm;
  }
  const double n = params.noise_var;
  const double gain = n + power * (1.0 - r3 * r3);
  const double t2 = r2 * r2 * gain - power * r5 * r5 * (1.0 - r4 * r4);
  if (t2 > 0.0) {
    const double r2sq = power * r5 * r5 * (1.0 - r4 * r4) / gain;
    r2 = std::copysign(std::sqrt(std::max(0.0, r2sq)), r2);
  }
  return CorrelationPoint{clip(r2), r3, r4, r5};
}

namespace {

struct ScanAccumulator {
  double best = std::numeric_limits<double>::infinity();
  CorrelationPoint best_pt{};
  std::size_t feasible = 0;
  std::size_t case1 = 0;
  double case1_min = std::numeric_limits<double>::infinity();

  void merge(const ScanAccumulator& o) {
    if (better(o.best, o.best_pt, best, best_pt)) {
      best = o.best;
      best_pt = o.best_pt;
    }
    feasible += o.feasible;
    case1 += o.case1;
    case1_min = std::min(case1_min, o.case1_min);
  }
};

// One slab of the grid with rho3 fixed.
ScanAccumulator scan_slab(double r3, const std::vector<double>& grid, double power,
                          const ModelParams& params) {
  const double q = params.source_var;
  const double n = params.noise_var;
  const double cross = q + 2.0 * r3 * std::sqrt(power * q);    // Q + 2 rho3 sqrt(PQ)
  const double t1_scale = power + n + cross;                   // P + Q + N + 2 rho3 sqrt(QP)
  const double one_m_r3sq = 1.0 - r3 * r3;
  const double gain = n + power * one_m_r3sq;                  // multiplies rho2^2 in T2
  const double pr3sq = power * r3 * r3;
  const double case1_u1_floor = power > 0.0 ? n / power : std::numeric_limits<double>::infinity();

  ScanAccumulator acc;
  for (double r5 : grid) {
    const double r5sq = r5 * r5;
    const double u1_excess = r3 * r3 + r5sq - 1.0;
    const bool u1_case2 = u1_excess <= kIneqTol;
    const bool u1_case1 = u1_excess - case1_u1_floor >= -kIneqTol;
    if (!u1_case2 && !u1_case1) continue;
    const double pr5sq = power * r5sq;
    const double p_one_m_r5sq = power * (1.0 - r5sq);

    for (double r4 : grid) {
      const double r4sq = r4 * r4;
      const double s4 = 1.0 - r4sq;
      const bool unit_r4 = std::abs(s4) < kUnitTol;
      const double t2_offset = pr5sq * s4;

      for (double r2 : grid) {
        const double r2sq = r2 * r2;
        const double aux = r2sq + r4sq - 1.0;
        const double t2 = r2sq * gain - t2_offset;
        const double t1 = t1_scale * aux;
        const bool in2 = u1_case2 && aux <= kIneqTol && t2 <= kIneqTol && t1 - t2 <= kIneqTol;
        const bool in1 = u1_case1 && aux >= -kIneqTol && t2 >= -kIneqTol && t1 - t2 >= -kIneqTol;
        if (!in2 && !in1) continue;

        // Only the branches where x -> N x / (N + x) is monotone and
        // nonnegative are meaningful: f >= 0 in Case 2, f < -N in Case 1.
        double cost;
        if (unit_r4) {
          cost = n;
        } else {
          const double f1 = -pr3sq * r2sq - cross * aux + p_one_m_r5sq * s4;
          const double den = s4 * n + f1;
          const bool ok2 = in2 && f1 >= 0.0 && den > 0.0;
          const bool ok1 = in1 && den < 0.0;
          if (!ok2 && !ok1) continue;
          cost = n * f1 / den;
        }
        if (!std::isfinite(cost)) continue;

        ++acc.feasible;
        if (in1 && !in2) {
          ++acc.case1;
          acc.case1_min = std::min(acc.case1_min, cost);
        }
        const CorrelationPoint pt{r2, r3, r4, r5};
        if (better(cost, pt, acc.best, acc.best_pt)) {
          acc.best = cost;
          acc.best_pt = pt;
        }
      }
    }
  }
  return acc;
}

}  // namespace

BruteForceResult brute_force_min(double power, const ModelParams& params,
                                 const BruteForceOptions& options) {
  check_inputs(power, params);
  if (!(options.resolution > 0.0 && options.resolution <= 0.1)) {
    throw InvalidParams("brute-force resolution must lie in (0, 0.1]");
  }
  const double q = params.source_var;
  const double n = params.noise_var;

  BruteForceResult res;
  if (power == 0.0) {
    // degenerate: no control input, the estimate sees only X0 + Z1
    res.argmin = res.grid_argmin = CorrelationPoint{0.0, -1.0, 0.0, 0.0};
    res.estimation = res.grid_estimation = q * n / (q + n);
    res.feasibility = classify(res.argmin, power, params);
    return res;
  }

  const std::vector<double> grid = make_grid(options.resolution);
  res.grid_points = grid.size() * grid.size() * grid.size() * grid.size();

  std::vector<ScanAccumulator> slabs(grid.size());
  parallel_for(grid.size(), resolve_threads(options.threads),
               [&](std::size_t i) { slabs[i] = scan_slab(grid[i], grid, power, params); });

  ScanAccumulator total;
  for (const auto& s : slabs) total.merge(s);  // fixed order: result independent of threading
  if (total.feasible == 0) {
    throw EmptyFeasibleSet("no feasible grid point at resolution " +
                           std::to_string(options.resolution));
  }

  res.feasible_points = total.feasible;
  res.case1_points = total.case1;
  if (total.case1 > 0) {
    res.case1_min = total.case1_min;
    res.case1_undercuts_limit = total.case1_min < n;
  }
  res.grid_estimation = total.best;
  res.grid_argmin = total.best_pt;
  res.estimation = total.best;
  res.argmin = total.best_pt;

  const FeasibilityCase grid_case = classify(total.best_pt, power, params);
  if (options.refine && grid_case.case2) {
    auto objective = [&](const std::array<double, 4>& x) {
      const CorrelationPoint pt = project_case2({x[0], x[1], x[2], x[3]}, power, params);
      const double c = cost_kernel(pt.x0_w2 * pt.x0_w2, pt.x0_u1, pt.w1_w2 * pt.w1_w2,
                                   pt.w1_u1 * pt.w1_u1, power, q, n);
      return std::isnan(c) ? std::numeric_limits<double>::infinity() : c;
    };
    const std::array<double, 4> start{total.best_pt.x0_w2, total.best_pt.x0_u1,
                                      total.best_pt.w1_w2, total.best_pt.w1_u1};
    const auto nm = detail::nelder_mead<4>(objective, start, options.resolution,
                                           options.refine_tolerance, options.max_iterations);
    res.refine_iterations = nm.iterations;
    const CorrelationPoint refined =
        project_case2({nm.x[0], nm.x[1], nm.x[2], nm.x[3]}, power, params);
    if (classify(refined, power, params).case2 && nm.value < res.estimation) {
      res.estimation = nm.value;
      res.argmin = refined;
    }
  }
  res.feasibility = classify(res.argmin, power, params);
  return res;
}

// ---------------------------------------------------------------------------
// feedback equivalence

FeedbackEvaluation feedback_constraint(const CorrelationPoint& point, double power,
                                       const ModelParams& params) {
  const CovMatrix six = build_joint_covariance(point, power, params);
  const Eigen::VectorXd coeff = mmse_coefficients(six, Var::X1, kDecoderView);

  // append U2 = a W1 + b W2 + c Y1 as a seventh variable
  Eigen::MatrixXd lift = Eigen::MatrixXd::Zero(7, 6);
  lift.topRows(6).setIdentity();
  lift(6, static_cast<Eigen::Index>(six.index_of(Var::W1))) = coeff(0);
  lift(6, static_cast<Eigen::Index>(six.index_of(Var::W2))) = coeff(1);
  lift(6, static_cast<Eigen::Index>(six.index_of(Var::Y1))) = coeff(2);

  std::vector<Var> labels = six.labels();
  labels.push_back(Var::U2);
  const CovMatrix seven(std::move(labels), lift * six.entries() * lift.transpose());

  FeedbackEvaluation out;
  out.w1_coeff = coeff(0);
  out.w2_coeff = coeff(1);
  out.y1_coeff = coeff(2);
  out.value = gaussian_mi(seven, {Var::W1}, {Var::Y1}) -
              conditional_mi(seven, {Var::U2}, {Var::X0}, {Var::W1, Var::Y1});
  return out;
}

double feedback_constraint_value(const CorrelationPoint& point, double power,
                                 const ModelParams& params) {
  return feedback_constraint(point, power, params).value;
}

// ---------------------------------------------------------------------------

VerificationReport verify_optimal_cost(const ModelParams& params, std::span<const double> powers,
                                       const BruteForceOptions& options, double tolerance,
                                       double undercut_tolerance) {
  VerificationReport report;
  report.params = ModelParams::make(params.source_var, params.noise_var);
  report.tolerance = tolerance;
  report.undercut_tolerance = undercut_tolerance;
  report.pass = true;

  for (double p : powers) {
    const BruteForceResult bf = brute_force_min(p, params, options);
    VerificationPoint vp;
    vp.power = p;
    vp.theory = optimal_gaussian_cost(p, params);
    vp.oracle = bf.estimation;
    vp.gap = vp.oracle - vp.theory;
    vp.argmin = bf.argmin;
    try {
      vp.constraint_at_argmin = info_constraint_value(bf.argmin, p, params);
    } catch (const UndefinedLogArgument&) {
      vp.constraint_at_argmin = std::numeric_limits<double>::quiet_NaN();
    }
    report.max_gap = std::max(report.max_gap, std::abs(vp.gap));
    if (std::abs(vp.gap) > tolerance || vp.gap < -undercut_tolerance) report.pass = false;
    report.points.push_back(vp);
  }
  return report;
}

}  // namespace witsopt
