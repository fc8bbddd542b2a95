#pragma once

// Jointly Gaussian machinery for the vector Witsenhausen model:
//
//   X1 = X0 + U1,   Y1 = X1 + Z1,   X0 ~ N(0, Q),  Z1 ~ N(0, N)
//
// with auxiliaries W1, W2 of unit variance. Everything here is a pure
// function of its inputs; covariances are immutable values.

#include <Eigen/Dense>

#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace witsopt {

/// Source variance Q and channel-noise variance N, both strictly positive.
struct ModelParams {
  double source_var = 0.0;
  double noise_var = 0.0;

  /// Throws InvalidParams unless both variances are finite and > 0.
  static ModelParams make(double source_var, double noise_var);
};

/// Free correlation coefficients of the Gaussian scheme.
///
/// Corr(X0, W1) is pinned to zero and Corr(W2, U1) is fixed by the
/// Markov chain U1 - (X0, W1) - W2, so four numbers parameterise the
/// whole covariance.
struct CorrelationPoint {
  double x0_w2 = 0.0;  // rho2
  double x0_u1 = 0.0;  // rho3
  double w1_w2 = 0.0;  // rho4
  double w1_u1 = 0.0;  // rho5

  /// Throws InvalidPoint if any coefficient lies outside [-1, 1] or is NaN.
  static CorrelationPoint make(double x0_w2, double x0_u1, double w1_w2, double w1_u1);

  /// Corr(X0, W1); always zero.
  static constexpr double x0_w1() noexcept { return 0.0; }
  /// Corr(W2, U1) = rho2 * rho3 + rho4 * rho5.
  double w2_u1() const noexcept { return x0_w2 * x0_u1 + w1_w2 * w1_u1; }

  bool operator==(const CorrelationPoint&) const = default;
};

/// Lexicographic order on (rho2, rho3, rho4, rho5); used for deterministic tie-breaks.
bool lex_less(const CorrelationPoint& a, const CorrelationPoint& b) noexcept;

enum class Var { X0, W1, W2, U1, X1, Y1, U2, X, Y, Z };

std::string_view to_string(Var v) noexcept;

/// Labelled symmetric covariance matrix.
class CovMatrix {
 public:
  CovMatrix(std::vector<Var> labels, Eigen::MatrixXd entries);

  const std::vector<Var>& labels() const noexcept { return labels_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return labels_.size(); }

  bool contains(Var v) const noexcept;
  /// Throws std::out_of_range for an unknown label.
  std::size_t index_of(Var v) const;
  double operator()(Var a, Var b) const;

  /// Principal submatrix in the requested label order.
  Eigen::MatrixXd block(std::span<const Var> vars) const;
  CovMatrix sub(std::span<const Var> vars) const;

  double smallest_eigenvalue() const;
  /// Smallest eigenvalue >= -1e-9 * trace.
  bool is_psd() const;

 private:
  std::vector<Var> labels_;
  Eigen::MatrixXd entries_;
};

/// Log-determinant with the library's boundary policy: a matrix whose
/// smallest eigenvalue lies in (-1e-9 tr, 1e-12 tr) is shifted by
/// 1e-12 tr I first; anything more negative raises SingularCovariance.
/// An empty matrix has log-det 0.
double regularized_logdet(const Eigen::MatrixXd& m);

/// Covariance of (X0, W1, W2, U1, X1, Y1) for the given point and power.
/// Throws InvalidPoint / InvalidParams on bad input and NotPsd when the
/// coefficients do not describe a valid joint distribution.
CovMatrix build_joint_covariance(const CorrelationPoint& point, double power,
                                 const ModelParams& params);

/// Same construction without the PSD check (used by diagnostics that want to
/// look at infeasible points).
CovMatrix build_joint_covariance_unchecked(const CorrelationPoint& point, double power,
                                           const ModelParams& params);

/// I(A; B) in nats for jointly Gaussian variables.
double gaussian_mi(const CovMatrix& cov, std::span<const Var> set_a, std::span<const Var> set_b);
double gaussian_mi(const CovMatrix& cov, std::initializer_list<Var> set_a,
                   std::initializer_list<Var> set_b);

/// I(A; B | C) in nats. An empty C reduces to gaussian_mi.
double conditional_mi(const CovMatrix& cov, std::span<const Var> set_a,
                      std::span<const Var> set_b, std::span<const Var> set_c);
double conditional_mi(const CovMatrix& cov, std::initializer_list<Var> set_a,
                      std::initializer_list<Var> set_b, std::initializer_list<Var> set_c);

/// Var(target | conditioners) via the Schur complement; this is the MMSE of
/// estimating target from the conditioners.
double schur_mmse(const CovMatrix& cov, Var target, std::span<const Var> conditioners);
double schur_mmse(const CovMatrix& cov, Var target, std::initializer_list<Var> conditioners);

/// Coefficients c of the linear MMSE estimate c^T W of target from conditioners W.
Eigen::VectorXd mmse_coefficients(const CovMatrix& cov, Var target,
                                  std::span<const Var> conditioners);

/// Covariance of (X, Y, Z) obeying the chain X - Y - Z:
/// Cov(X, Z) = corr_xy * corr_yz * sqrt(var_x * var_z).
CovMatrix markov_triple_covariance(double var_x, double var_y, double var_z, double corr_xy,
                                   double corr_yz);

inline constexpr double nats_to_bits(double nats) noexcept {
  return nats / 0.69314718055994530942;
}

}  // namespace witsopt
