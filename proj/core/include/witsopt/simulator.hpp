#pragma once

// Seeded Monte Carlo evaluation of concrete control designs over the i.i.d.
// Gaussian channel. Sample t draws its source and noise from a counter-based
// stream keyed by (seed, t), and partial sums are reduced in fixed
// 4096-sample blocks, so results are bit-identical for any chunk size or
// thread count.

#include "witsopt/gausscore.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>

namespace witsopt {

/// Linear encoder U1 = -sqrt(P/Q) X0 (or -X0 + sqrt(P - Q) when P > Q).
struct AffineStrategy {
  double power = 0.0;
};

/// Deterministic split between the two affine operating points P1 and P2.
struct TimeShareStrategy {
  double power = 0.0;
};

/// Two-point encoder U1 = a sign(X0) - X0 with a tanh receiver.
struct TwoPointStrategy {
  double amplitude = 0.0;
};

using Strategy = std::variant<AffineStrategy, TimeShareStrategy, TwoPointStrategy>;

std::string describe(const Strategy& s);

struct SimConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t chunk = 65536;
  std::size_t threads = 0;  // 0 = resolve_threads()
};

struct SimResult {
  double power_hat = 0.0;
  double estimation_hat = 0.0;
  double power_se = 0.0;
  double estimation_se = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

struct AffineReceiver {
  double gain = 0.0;
  double offset = 0.0;
};

/// Linear MMSE receiver matched to the affine encoder at the given power.
AffineReceiver affine_receiver_coefficients(double power, const ModelParams& params);

/// Expected (power, estimation) of the strategy: S_l for Affine, S_G for
/// TimeShare, the quadrature costs for TwoPoint.
std::pair<double, double> strategy_theory(const Strategy& s, const ModelParams& params);

/// Throws InvalidStrategy when the strategy or config violates its preconditions.
SimResult simulate(const Strategy& strategy, const ModelParams& params, const SimConfig& config);

/// Standard normal pair for sample `index` of the stream keyed by `seed`.
/// Exposed for tests; this is the only randomness the simulator uses.
std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace witsopt
