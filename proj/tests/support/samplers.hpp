#pragma once

#include "oracles.hpp"
#include "witsopt/optimizer.hpp"

#include <random>

namespace sampler {

// Random strictly-inside Case-2 point: both correlation pairs in a disc of
// radius 0.98 and T2 <= -1e-6, so the covariance is comfortably PSD.
inline witsopt::CorrelationPoint case2_point(std::mt19937_64& rng, double p, double q, double n) {
  for (;;) {
    const auto [r2, r4] = oracle::disc(rng, 0.98);
    const auto [r3, r5] = oracle::disc(rng, 0.98);
    const double t2 = n * r2 * r2 + p * r2 * r2 * (1.0 - r3 * r3) - p * r5 * r5 * (1.0 - r4 * r4);
    if (t2 > -1e-6) continue;
    return witsopt::CorrelationPoint{r2, r3, r4, r5};
  }
}

// Random model: Q in [0.2, 2], N in [0.02, 0.5], P in [0.02, 1.5].
struct Draw {
  witsopt::ModelParams params;
  double power;
};

inline Draw model(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uq(0.2, 2.0), un(0.02, 0.5), up(0.02, 1.5);
  return {witsopt::ModelParams{uq(rng), un(rng)}, up(rng)};
}

}  // namespace sampler
