#pragma once

// Reference computations for the tests. These deliberately avoid the
// library's own code paths: the two-point oracle integrates the mixture
// density with fixed composite Gauss-Legendre, the covariance is assembled
// entry by entry, and conditional covariances use a plain LDLT solve.

#include "witsopt/gausscore.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// 20-point Gauss-Legendre nodes/weights on [-1, 1] via Newton on P_n.
struct GaussLegendre {
  static constexpr int n = 20;
  std::array<double, n> x{};
  std::array<double, n> w{};

  GaussLegendre() {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

template <class F>
double integrate(F&& f, double lo, double hi, int panels) {
  static const GaussLegendre gl;
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    double s = 0.0;
    for (int i = 0; i < GaussLegendre::n; ++i) s += gl.w[i] * f(mid + 0.5 * h * gl.x[i]);
    total += 0.5 * h * s;
  }
  return total;
}

// MMSE of X1 = +/-a (equiprobable) observed through N(0, n) noise, written as
// the posterior-weighted squared error under the two mixture components.
inline double two_point_mmse(double a, double n) {
  if (a == 0.0) return 0.0;
  const double sd = std::sqrt(n);
  auto phi = [&](double t) {
    return std::exp(-t * t / (2.0 * n)) / std::sqrt(2.0 * std::numbers::pi * n);
  };
  auto integrand = [&](double y) {
    const double pp = phi(y - a);
    const double pm = phi(y + a);
    const double tot = pp + pm;
    if (tot == 0.0) return 0.0;
    const double est = a * (pp - pm) / tot;
    return 0.5 * pp * (a - est) * (a - est) + 0.5 * pm * (a + est) * (a + est);
  };
  return integrate(integrand, -a - 14.0 * sd, a + 14.0 * sd, 4000);
}

inline double two_point_power(double a, double q) {
  return q - 2.0 * a * std::sqrt(2.0 * q / std::numbers::pi) + a * a;
}

// Covariance of (X0, W1, W2, U1, X1, Y1) from the defining relations.
inline Eigen::MatrixXd joint_covariance(double r2, double r3, double r4, double r5, double p,
                                        double q, double n) {
  const double r6 = r2 * r3 + r4 * r5;
  const double sq = std::sqrt(q), sp = std::sqrt(p);
  Eigen::Matrix4d k;
  k << q, 0.0, r2 * sq, r3 * sq * sp,
      0.0, 1.0, r4, r5 * sp,
      r2 * sq, r4, 1.0, r6 * sp,
      r3 * sq * sp, r5 * sp, r6 * sp, p;
  Eigen::MatrixXd m(6, 6);
  m.setZero();
  m.topLeftCorner<4, 4>() = k;
  // X1 = X0 + U1, Y1 = X1 + Z1 with Z1 independent of the rest
  for (int j = 0; j < 4; ++j) {
    m(4, j) = m(j, 4) = k(0, j) + k(3, j);
    m(5, j) = m(j, 5) = m(4, j);
  }
  m(4, 4) = q + p + 2.0 * k(0, 3);
  m(4, 5) = m(5, 4) = m(4, 4);
  m(5, 5) = m(4, 4) + n;
  return m;
}

// Cov(A, B | C) by explicit conditioning.
inline Eigen::MatrixXd conditional_cross_cov(const witsopt::CovMatrix& cov,
                                             const std::vector<witsopt::Var>& a,
                                             const std::vector<witsopt::Var>& b,
                                             const std::vector<witsopt::Var>& c) {
  auto pick = [&](const std::vector<witsopt::Var>& r, const std::vector<witsopt::Var>& s) {
    Eigen::MatrixXd m(r.size(), s.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) m(i, j) = cov(r[i], s[j]);
    return m;
  };
  const Eigen::MatrixXd scc = pick(c, c);
  return pick(a, b) - pick(a, c) * scc.ldlt().solve(pick(c, b));
}

// Uniform point in the unit disc, optionally scaled into radius r.
inline std::pair<double, double> disc(std::mt19937_64& rng, double r = 1.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const double x = u(rng), y = u(rng);
    if (x * x + y * y < 1.0) return {r * x, r * y};
  }
}

}  // namespace oracle
