#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>

namespace witsopt::detail {

template <std::size_t Dim>
struct SimplexResult {
  std::array<double, Dim> x{};
  double value = 0.0;
  int iterations = 0;
};

// Plain Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
// Stops when the spread of simplex values drops below `tol` or after
// `max_iter` iterations.
template <std::size_t Dim, class F>
SimplexResult<Dim> nelder_mead(F&& f, const std::array<double, Dim>& start, double step,
                               double tol, int max_iter) {
  using Point = std::array<double, Dim>;
  std::array<Point, Dim + 1> pts;
  std::array<double, Dim + 1> vals;

  pts[0] = start;
  for (std::size_t i = 0; i < Dim; ++i) {
    pts[i + 1] = start;
    // step inward when the start sits on the upper edge of the box
    pts[i + 1][i] += (start[i] + step <= 1.0) ? step : -step;
  }
  for (std::size_t i = 0; i <= Dim; ++i) vals[i] = f(pts[i]);

  std::array<std::size_t, Dim + 1> order;
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    auto p = pts;
    auto v = vals;
    for (std::size_t i = 0; i <= Dim; ++i) {
      pts[i] = p[order[i]];
      vals[i] = v[order[i]];
    }
  };

  auto blend = [](const Point& a, const Point& b, double t) {
    Point out;
    for (std::size_t i = 0; i < Dim; ++i) out[i] = a[i] + t * (b[i] - a[i]);
    return out;
  };

  int it = 0;
  for (; it < max_iter; ++it) {
    sort_simplex();
    if (std::abs(vals[Dim] - vals[0]) <= tol) break;

    Point centroid{};
    for (std::size_t i = 0; i < Dim; ++i) {
      for (std::size_t k = 0; k < Dim; ++k) centroid[k] += pts[i][k] / static_cast<double>(Dim);
    }

    const Point reflected = blend(centroid, pts[Dim], -1.0);
    const double fr = f(reflected);
    if (fr < vals[0]) {
      const Point expanded = blend(centroid, pts[Dim], -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[Dim] = expanded;
        vals[Dim] = fe;
      } else {
        pts[Dim] = reflected;
        vals[Dim] = fr;
      }
      continue;
    }
    if (fr < vals[Dim - 1]) {
      pts[Dim] = reflected;
      vals[Dim] = fr;
      continue;
    }

    const bool outside = fr < vals[Dim];
    const Point contracted =
        outside ? blend(centroid, reflected, 0.5) : blend(centroid, pts[Dim], 0.5);
    const double fc = f(contracted);
    if (fc < std::min(fr, vals[Dim])) {
      pts[Dim] = contracted;
      vals[Dim] = fc;
      continue;
    }

    for (std::size_t i = 1; i <= Dim; ++i) {
      pts[i] = blend(pts[0], pts[i], 0.5);
      vals[i] = f(pts[i]);
    }
  }
  sort_simplex();
  return {pts[0], vals[0], it};
}

}  // namespace witsopt::detail
