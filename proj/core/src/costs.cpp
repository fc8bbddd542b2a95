#include "witsopt/costs.hpp"

#include "witsopt/errors.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace witsopt {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

// Half-width of the two-point integration domain beyond +-a, in units of sqrt(N).
constexpr double kTailWidth = 10.0;
constexpr double kQuadratureAbsTol = 1e-10;

void check_power(double power) {
  if (!(std::isfinite(power) && power >= 0.0)) {
    throw InvalidParams("power must be finite and >= 0, got " + std::to_string(power));
  }
}

void check_params(const ModelParams& params) {
  ModelParams::make(params.source_var, params.noise_var);
}

}  // namespace

double best_linear_cost(double power, const ModelParams& params) {
  check_power(power);
  check_params(params);
  const double q = params.source_var;
  const double n = params.noise_var;
  if (power > q) return 0.0;
  const double gap = std::sqrt(q) - std::sqrt(power);
  const double d = gap * gap;
  return d * n / (d + n);
}

std::optional<Thresholds> gaussian_thresholds(const ModelParams& params) {
  check_params(params);
  const double q = params.source_var;
  const double n = params.noise_var;
  if (!(q > 4.0 * n)) return std::nullopt;
  const double high = 0.5 * (q - 2.0 * n + std::sqrt(q * q - 4.0 * q * n));
  // the small root loses digits to cancellation; take it from the product of roots
  const double low = n * n / high;
  return Thresholds{low, high};
}

double optimal_gaussian_cost(double power, const ModelParams& params) {
  check_power(power);
  const auto window = gaussian_thresholds(params);
  if (window && power >= window->low && power <= window->high) {
    const double q = params.source_var;
    const double n = params.noise_var;
    return n * (q - n - power) / q;
  }
  return best_linear_cost(power, params);
}

double time_share_weight(double power, const ModelParams& params) {
  check_power(power);
  const auto window = gaussian_thresholds(params);
  if (!window) {
    throw OutOfWindow("time-sharing window is empty (Q <= 4N)");
  }
  const double slack = 1e-12 * params.source_var;
  if (power < window->low - slack || power > window->high + slack) {
    throw OutOfWindow("power " + std::to_string(power) + " outside time-sharing window [" +
                      std::to_string(window->low) + ", " + std::to_string(window->high) + "]");
  }
  const double p = std::clamp(power, window->low, window->high);
  return (window->high - p) / (window->high - window->low);
}

double two_point_receiver(double y, double amplitude, double noise_var) noexcept {
  return amplitude * std::tanh(amplitude * y / noise_var);
}

double two_point_power(double amplitude, const ModelParams& params) {
  if (!(amplitude >= 0.0)) throw InvalidParams("two-point amplitude must be >= 0");
  check_params(params);
  const double q = params.source_var;
  return q + amplitude * (amplitude - 2.0 * std::sqrt(2.0 * q / kPi));
}

CostPoint two_point_costs(double amplitude, const ModelParams& params) {
  const double power = two_point_power(amplitude, params);
  if (amplitude == 0.0) return {power, 0.0};

  const double a = amplitude;
  const double n = params.noise_var;
  // phi(a/sqrt N) phi(y/sqrt N) / cosh(a y / N) rewritten without overflow:
  //   (1/pi) / (exp((y+a)^2 / 2N) + exp((y-a)^2 / 2N))
  auto integrand = [a, n](double y) {
    const double up = (y + a) * (y + a) / (2.0 * n);
    const double dn = (y - a) * (y - a) / (2.0 * n);
    // factor out the larger exponent so nothing overflows
    const double hi = std::max(up, dn);
    return std::exp(-hi) / (1.0 + std::exp(-std::abs(up - dn)));
  };

  const double half = a + kTailWidth * std::sqrt(n);
  const double prefactor = a * a * std::sqrt(2.0 * kPi / n) / kPi;

  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, -half, half, 20, 1e-14, &error);
  const double abs_error = prefactor * error;
  if (!std::isfinite(integral) || abs_error > kQuadratureAbsTol) {
    throw QuadratureNotConverged("two-point quadrature error estimate " +
                                 std::to_string(abs_error) + " above tolerance");
  }
  const double s = std::clamp(prefactor * integral, 0.0, a * a);
  return {power, s};
}

std::vector<double> two_point_amplitudes(double power, const ModelParams& params) {
  check_power(power);
  check_params(params);
  const double q = params.source_var;
  const double centre = std::sqrt(2.0 * q / kPi);
  const double disc = centre * centre - q + power;
  const double tol = 1e-14 * q;
  if (disc < -tol) return {};
  if (std::abs(disc) <= tol) return {centre};
  const double r = std::sqrt(disc);
  std::vector<double> roots;
  if (centre - r >= 0.0) roots.push_back(centre - r);
  roots.push_back(centre + r);
  return roots;
}

std::vector<TwoPointSweepEntry> sweep_two_point(const ModelParams& params,
                                                std::span<const double> power_grid) {
  if (power_grid.empty()) throw InvalidParams("two-point sweep needs a nonempty power grid");
  std::vector<TwoPointSweepEntry> out;
  out.reserve(power_grid.size());
  for (double p : power_grid) {
    TwoPointSweepEntry entry{p, std::nullopt, std::nullopt};
    for (double a : two_point_amplitudes(p, params)) {
      const double s = two_point_costs(a, params).estimation;
      if (!entry.estimation || s < *entry.estimation) {
        entry.estimation = s;
        entry.amplitude = a;
      }
    }
    out.push_back(entry);
  }
  return out;
}

}  // namespace witsopt
