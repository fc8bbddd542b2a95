#pragma once

// Closed-form cost curves: the best affine policy, its convex envelope (the
// optimal Gaussian cost), and Witsenhausen's two-point strategy.

#include "witsopt/gausscore.hpp"

#include <optional>
#include <span>
#include <vector>

namespace witsopt {

/// An achievable (power, estimation-error) pair.
struct CostPoint {
  double power = 0.0;
  double estimation = 0.0;
};

/// End points of the time-sharing window, P1 <= P2. They are the roots of
/// x^2 - (Q - 2N) x + N^2, so P1 + P2 = Q - 2N and P1 * P2 = N^2.
struct Thresholds {
  double low = 0.0;
  double high = 0.0;
};

/// Estimation cost of the best affine policy U1 = -sqrt(P/Q) X0 (or the
/// constant shift when P > Q).
double best_linear_cost(double power, const ModelParams& params);

/// Time-sharing window; empty when Q <= 4N.
std::optional<Thresholds> gaussian_thresholds(const ModelParams& params);

/// Optimal cost over jointly Gaussian schemes: affine on [P1, P2] when the
/// window exists, the affine-policy cost elsewhere.
double optimal_gaussian_cost(double power, const ModelParams& params);

/// Weight lambda on the P1 operating point so that lambda P1 + (1-lambda) P2 = power.
/// Powers within 1e-12 Q of the window are clamped onto it; otherwise throws
/// OutOfWindow.
double time_share_weight(double power, const ModelParams& params);

/// MMSE receiver for the two-point encoder: a * tanh(a y / N).
double two_point_receiver(double y, double amplitude, double noise_var) noexcept;

/// Power of the two-point strategy U1 = a sign(X0) - X0.
double two_point_power(double amplitude, const ModelParams& params);

/// Power and estimation cost of the two-point strategy. The estimation cost
/// is evaluated by adaptive Gauss-Kronrod quadrature on
/// [-a - 10 sqrt(N), a + 10 sqrt(N)] to an absolute tolerance of 1e-10.
CostPoint two_point_costs(double amplitude, const ModelParams& params);

struct TwoPointSweepEntry {
  double power = 0.0;
  /// Empty when the power lies below the two-point parabola minimum.
  std::optional<double> estimation;
  /// Amplitude that produced `estimation`.
  std::optional<double> amplitude;
};

/// Nonnegative amplitudes a with two_point_power(a) == power (0, 1 or 2 roots).
std::vector<double> two_point_amplitudes(double power, const ModelParams& params);

/// For every power on the grid, solve for the amplitude roots and keep the
/// smaller estimation cost.
std::vector<TwoPointSweepEntry> sweep_two_point(const ModelParams& params,
                                                std::span<const double> power_grid);

}  // namespace witsopt
