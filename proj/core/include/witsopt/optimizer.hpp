#pragma once

// Optimisation of the estimation cost over jointly Gaussian schemes.
//
// A scheme is a CorrelationPoint (rho2..rho5) at a given power. The
// information constraint and the MMSE are available in closed form
// (objective_terms, info_constraint_value, estimation_cost) and, for
// cross-checking, through generic log-det / Schur-complement routes on the
// explicit covariance. analytic_optimum gives the optimiser in closed form;
// brute_force_min is an independent grid-plus-simplex search used to
// confirm it.

#include "witsopt/costs.hpp"
#include "witsopt/gausscore.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace witsopt {

/// Closed-form pieces of the constraint and the objective.
struct ObjectiveTerms {
  double t1 = 0.0;
  double t2 = 0.0;
  double f1 = 0.0;
  /// f1 / (1 - rho4^2); empty when |1 - rho4^2| < 1e-12.
  std::optional<double> f;
};

ObjectiveTerms objective_terms(const CorrelationPoint& point, double power,
                               const ModelParams& params);

/// 0.5 ln(T1 / (T1 - T2)) in nats. Throws UndefinedLogArgument when the ratio
/// is not positive.
double info_constraint_value(const CorrelationPoint& point, double power,
                             const ModelParams& params);

/// N f1 / ((1 - rho4^2) N + f1), or exactly N when rho4^2 = 1.
double estimation_cost(const CorrelationPoint& point, double power, const ModelParams& params);

/// Log-det route: I(W1,W2; Y1) - I(W2; X0 | W1) on the explicit covariance.
double info_constraint_via_mi(const CorrelationPoint& point, double power,
                              const ModelParams& params);
/// Chain-rule form of the same quantity: I(W1; Y1) - I(W2; X0 | W1, Y1).
double info_constraint_via_chain_rule(const CorrelationPoint& point, double power,
                                      const ModelParams& params);
/// Schur-complement route: Var(X1 | W1, W2, Y1).
double estimation_cost_via_schur(const CorrelationPoint& point, double power,
                                 const ModelParams& params);

enum class Regime { Case1, Case2, Infeasible };
std::string_view to_string(Regime r) noexcept;

/// Raw values behind the feasibility classification. Each constraint holds
/// when its value has the indicated sign (within 1e-12).
struct ConstraintDiagnostics {
  double aux_excess = 0.0;  // -1 + rho2^2 + rho4^2
  double u1_excess = 0.0;   // -1 + rho3^2 + rho5^2
  double det_k = 0.0;       // (A) >= 0
  double det_k2 = 0.0;      // (B) >= 0
  double t1_minus_t2 = 0.0; // (C1) >= 0, (C2) <= 0
  double t2 = 0.0;          // (D1) >= 0, (D2) <= 0
  bool a = false, b = false, c1 = false, d1 = false, c2 = false, d2 = false;
};

struct FeasibilityCase {
  Regime tag = Regime::Infeasible;
  bool case1 = false;  // the Case-1 triple holds
  bool case2 = false;  // the Case-2 triple holds
  ConstraintDiagnostics diagnostics;
};

/// Case1: rho2^2 + rho4^2 >= 1, rho3^2 + rho5^2 >= 1 + N/P and T2 >= 0.
/// Case2: rho2^2 + rho4^2 <= 1, rho3^2 + rho5^2 <= 1 and T2 <= 0.
/// A point on a shared boundary reports Case2 as its tag and sets both flags.
FeasibilityCase classify(const CorrelationPoint& point, double power, const ModelParams& params);

enum class Branch { PgeQ, Interior, Boundary, Case1Limit };
std::string_view to_string(Branch b) noexcept;

struct Optimum {
  CorrelationPoint point;
  double estimation = 0.0;
  double constraint_value = 0.0;
  Branch branch = Branch::Boundary;
};

/// Closed-form minimiser of the estimation cost at the given power.
Optimum analytic_optimum(double power, const ModelParams& params);

struct BruteForceOptions {
  double resolution = 0.02;
  bool refine = true;
  int max_iterations = 2000;
  double refine_tolerance = 1e-10;
  std::size_t threads = 0;  // 0 = resolve_threads()
};

struct BruteForceResult {
  double estimation = 0.0;
  CorrelationPoint argmin;
  FeasibilityCase feasibility;
  double grid_estimation = 0.0;
  CorrelationPoint grid_argmin;
  std::size_t grid_points = 0;
  std::size_t feasible_points = 0;
  std::size_t case1_points = 0;
  /// Smallest cost seen at a Case-1 grid point; the Case-1 infimum is N.
  std::optional<double> case1_min;
  /// True if some Case-1 grid point beat N (not expected).
  bool case1_undercuts_limit = false;
  int refine_iterations = 0;
};

/// Scans {-1, -1 + res, ..., 1}^4, keeps points admitted to Case 1 or Case 2
/// (with (C1)/(C2) respectively), then refines the best one with a projected
/// Nelder-Mead simplex. Ties go to the lexicographically smallest point.
BruteForceResult brute_force_min(double power, const ModelParams& params,
                                 const BruteForceOptions& options = {});

/// Maps an arbitrary point onto the Case-2 feasible set: clips to [-1,1],
/// rescales (rho2,rho4) and (rho3,rho5) into the unit disc, then shrinks
/// |rho2| until T2 <= 0.
CorrelationPoint project_case2(const CorrelationPoint& point, double power,
                               const ModelParams& params);

struct FeedbackEvaluation {
  double value = 0.0;  // I(W1; Y1) - I(U2; X0 | W1, Y1), nats
  double w1_coeff = 0.0;
  double w2_coeff = 0.0;
  double y1_coeff = 0.0;
};

/// Information constraint with channel feedback, where U2 is the MMSE
/// estimate a W1 + b W2 + c Y1 of X1.
FeedbackEvaluation feedback_constraint(const CorrelationPoint& point, double power,
                                       const ModelParams& params);
double feedback_constraint_value(const CorrelationPoint& point, double power,
                                 const ModelParams& params);

struct VerificationPoint {
  double power = 0.0;
  double theory = 0.0;
  double oracle = 0.0;
  double gap = 0.0;  // oracle - theory
  CorrelationPoint argmin;
  double constraint_at_argmin = 0.0;
};

struct VerificationReport {
  ModelParams params;
  double tolerance = 5e-3;
  double undercut_tolerance = 1e-6;
  std::vector<VerificationPoint> points;
  double max_gap = 0.0;  // max |gap|
  bool pass = false;
};

/// Runs brute_force_min against optimal_gaussian_cost at every power.
VerificationReport verify_optimal_cost(const ModelParams& params, std::span<const double> powers,
                                       const BruteForceOptions& options = {},
                                       double tolerance = 5e-3,
                                       double undercut_tolerance = 1e-6);

}  // namespace witsopt
