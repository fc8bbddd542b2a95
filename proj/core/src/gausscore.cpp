#include "witsopt/gausscore.hpp"

#include "witsopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace witsopt {

namespace {

constexpr double kPsdTolerance = 1e-9;     // relative to trace
constexpr double kRegularization = 1e-12;  // relative to trace

void check_correlation(double rho, const char* name) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw InvalidPoint(std::string("correlation ") + name + " = " + std::to_string(rho) +
                       " outside [-1, 1]");
  }
}

std::vector<Var> concat(std::span<const Var> a, std::span<const Var> b) {
  std::vector<Var> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<Var> concat(std::span<const Var> a, std::span<const Var> b,
                        std::span<const Var> c) {
  auto out = concat(a, b);
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

bool disjoint(std::span<const Var> a, std::span<const Var> b) {
  return std::none_of(a.begin(), a.end(), [&](Var v) {
    return std::find(b.begin(), b.end(), v) != b.end();
  });
}

void require_labels(const CovMatrix& cov, std::span<const Var> vars) {
  for (Var v : vars) {
    if (!cov.contains(v)) {
      throw std::invalid_argument("label " + std::string(to_string(v)) +
                                  " not present in covariance");
    }
  }
}

// Applies the boundary policy and returns the (possibly shifted) matrix.
Eigen::MatrixXd regularize(const Eigen::MatrixXd& m) {
  const double tr = m.trace();
  if (!(tr > 0.0)) {
    throw SingularCovariance("covariance block has non-positive trace");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  if (lo <= -kPsdTolerance * tr) {
    throw SingularCovariance("covariance block is indefinite (smallest eigenvalue " +
                             std::to_string(lo) + ")");
  }
  if (lo < kRegularization * tr) {
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += kRegularization * tr;
    return shifted;
  }
  return m;
}

}  // namespace

ModelParams ModelParams::make(double source_var, double noise_var) {
  if (!(std::isfinite(source_var) && source_var > 0.0)) {
    throw InvalidParams("source variance Q must be finite and > 0");
  }
  if (!(std::isfinite(noise_var) && noise_var > 0.0)) {
    throw InvalidParams("noise variance N must be finite and > 0");
  }
  return ModelParams{source_var, noise_var};
}

CorrelationPoint CorrelationPoint::make(double x0_w2, double x0_u1, double w1_w2,
                                        double w1_u1) {
  check_correlation(x0_w2, "rho2");
  check_correlation(x0_u1, "rho3");
  check_correlation(w1_w2, "rho4");
  check_correlation(w1_u1, "rho5");
  return CorrelationPoint{x0_w2, x0_u1, w1_w2, w1_u1};
}

bool lex_less(const CorrelationPoint& a, const CorrelationPoint& b) noexcept {
  if (a.x0_w2 != b.x0_w2) return a.x0_w2 < b.x0_w2;
  if (a.x0_u1 != b.x0_u1) return a.x0_u1 < b.x0_u1;
  if (a.w1_w2 != b.w1_w2) return a.w1_w2 < b.w1_w2;
  return a.w1_u1 < b.w1_u1;
}

std::string_view to_string(Var v) noexcept {
  switch (v) {
    case Var::X0: return "X0";
    case Var::W1: return "W1";
    case Var::W2: return "W2";
    case Var::U1: return "U1";
    case Var::X1: return "X1";
    case Var::Y1: return "Y1";
    case Var::U2: return "U2";
    case Var::X: return "X";
    case Var::Y: return "Y";
    case Var::Z: return "Z";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// CovMatrix

CovMatrix::CovMatrix(std::vector<Var> labels, Eigen::MatrixXd entries)
    : labels_(std::move(labels)), entries_(std::move(entries)) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw std::invalid_argument("covariance shape does not match label count");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    for (std::size_t j = i + 1; j < labels_.size(); ++j) {
      if (labels_[i] == labels_[j]) throw std::invalid_argument("duplicate covariance label");
    }
  }
  // symmetrise; callers build both triangles, this only removes rounding skew
  entries_ = 0.5 * (entries_ + entries_.transpose()).eval();
  if ((entries_.diagonal().array() < 0.0).any()) {
    throw NotPsd("negative variance on the diagonal");
  }
}

bool CovMatrix::contains(Var v) const noexcept {
  return std::find(labels_.begin(), labels_.end(), v) != labels_.end();
}

std::size_t CovMatrix::index_of(Var v) const {
  auto it = std::find(labels_.begin(), labels_.end(), v);
  if (it == labels_.end()) {
    throw std::out_of_range("label " + std::string(to_string(v)) + " not in covariance");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

double CovMatrix::operator()(Var a, Var b) const {
  return entries_(static_cast<Eigen::Index>(index_of(a)),
                  static_cast<Eigen::Index>(index_of(b)));
}

Eigen::MatrixXd CovMatrix::block(std::span<const Var> vars) const {
  const auto n = static_cast<Eigen::Index>(vars.size());
  Eigen::MatrixXd out(n, n);
  std::vector<Eigen::Index> idx;
  idx.reserve(vars.size());
  for (Var v : vars) idx.push_back(static_cast<Eigen::Index>(index_of(v)));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) out(i, j) = entries_(idx[i], idx[j]);
  }
  return out;
}

CovMatrix CovMatrix::sub(std::span<const Var> vars) const {
  return CovMatrix(std::vector<Var>(vars.begin(), vars.end()), block(vars));
}

double CovMatrix::smallest_eigenvalue() const {
  if (labels_.empty()) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool CovMatrix::is_psd() const {
  if (labels_.empty()) return true;
  return smallest_eigenvalue() >= -kPsdTolerance * entries_.trace();
}

// ---------------------------------------------------------------------------

double regularized_logdet(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  const Eigen::MatrixXd r = regularize(m);
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw SingularCovariance("determinant <= 0 after regularization");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

CovMatrix build_joint_covariance_unchecked(const CorrelationPoint& point, double power,
                                           const ModelParams& params) {
  const CorrelationPoint p =
      CorrelationPoint::make(point.x0_w2, point.x0_u1, point.w1_w2, point.w1_u1);
  ModelParams::make(params.source_var, params.noise_var);
  if (!(std::isfinite(power) && power >= 0.0)) {
    throw InvalidParams("power must be finite and >= 0");
  }

  const double q = params.source_var;
  const double sq = std::sqrt(q);
  const double sp = std::sqrt(power);

  // (X0, W1, W2, U1) with unit-variance auxiliaries
  Eigen::Matrix4d k;
  k << q, 0.0, p.x0_w2 * sq, p.x0_u1 * sq * sp,
       0.0, 1.0, p.w1_w2, p.w1_u1 * sp,
       p.x0_w2 * sq, p.w1_w2, 1.0, p.w2_u1() * sp,
       p.x0_u1 * sq * sp, p.w1_u1 * sp, p.w2_u1() * sp, power;

  // rows map (X0, W1, W2, U1) onto (X0, W1, W2, U1, X1 = X0 + U1, Y1 = X1 + Z1)
  Eigen::Matrix<double, 6, 4> lift = Eigen::Matrix<double, 6, 4>::Zero();
  lift.topRows<4>().setIdentity();
  lift(4, 0) = lift(4, 3) = 1.0;
  lift(5, 0) = lift(5, 3) = 1.0;

  Eigen::MatrixXd full = lift * k * lift.transpose();
  full(5, 5) += params.noise_var;

  return CovMatrix({Var::X0, Var::W1, Var::W2, Var::U1, Var::X1, Var::Y1}, std::move(full));
}

CovMatrix build_joint_covariance(const CorrelationPoint& point, double power,
                                 const ModelParams& params) {
  CovMatrix cov = build_joint_covariance_unchecked(point, power, params);
  if (!cov.is_psd()) {
    throw NotPsd("correlation point does not define a valid covariance (smallest eigenvalue " +
                 std::to_string(cov.smallest_eigenvalue()) + ")");
  }
  return cov;
}

double gaussian_mi(const CovMatrix& cov, std::span<const Var> set_a,
                   std::span<const Var> set_b) {
  if (set_a.empty() || set_b.empty()) {
    throw std::invalid_argument("mutual information needs two nonempty sets");
  }
  if (!disjoint(set_a, set_b)) throw std::invalid_argument("MI sets must be disjoint");
  require_labels(cov, set_a);
  require_labels(cov, set_b);

  const auto ab = concat(set_a, set_b);
  const double v = 0.5 * (regularized_logdet(cov.block(set_a)) +
                          regularized_logdet(cov.block(set_b)) -
                          regularized_logdet(cov.block(ab)));
  return std::max(0.0, v);
}

double gaussian_mi(const CovMatrix& cov, std::initializer_list<Var> set_a,
                   std::initializer_list<Var> set_b) {
  return gaussian_mi(cov, std::span<const Var>(set_a.begin(), set_a.size()),
                     std::span<const Var>(set_b.begin(), set_b.size()));
}

double conditional_mi(const CovMatrix& cov, std::span<const Var> set_a,
                      std::span<const Var> set_b, std::span<const Var> set_c) {
  if (set_c.empty()) return gaussian_mi(cov, set_a, set_b);
  if (set_a.empty() || set_b.empty()) {
    throw std::invalid_argument("conditional MI needs nonempty A and B");
  }
  if (!disjoint(set_a, set_b) || !disjoint(set_a, set_c) || !disjoint(set_b, set_c)) {
    throw std::invalid_argument("conditional MI sets must be pairwise disjoint");
  }
  require_labels(cov, set_a);
  require_labels(cov, set_b);
  require_labels(cov, set_c);

  const double v = 0.5 * (regularized_logdet(cov.block(concat(set_a, set_c))) +
                          regularized_logdet(cov.block(concat(set_b, set_c))) -
                          regularized_logdet(cov.block(set_c)) -
                          regularized_logdet(cov.block(concat(set_a, set_b, set_c))));
  return std::max(0.0, v);
}

double conditional_mi(const CovMatrix& cov, std::initializer_list<Var> set_a,
                      std::initializer_list<Var> set_b, std::initializer_list<Var> set_c) {
  return conditional_mi(cov, std::span<const Var>(set_a.begin(), set_a.size()),
                        std::span<const Var>(set_b.begin(), set_b.size()),
                        std::span<const Var>(set_c.begin(), set_c.size()));
}

Eigen::VectorXd mmse_coefficients(const CovMatrix& cov, Var target,
                                  std::span<const Var> conditioners) {
  if (std::find(conditioners.begin(), conditioners.end(), target) != conditioners.end()) {
    throw std::invalid_argument("target must not be among the conditioners");
  }
  require_labels(cov, conditioners);
  if (conditioners.empty()) return Eigen::VectorXd(0);

  const Eigen::MatrixXd ww = regularize(cov.block(conditioners));
  Eigen::VectorXd tw(static_cast<Eigen::Index>(conditioners.size()));
  for (std::size_t i = 0; i < conditioners.size(); ++i) {
    tw(static_cast<Eigen::Index>(i)) = cov(target, conditioners[i]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(ww);
  if (llt.info() != Eigen::Success) {
    throw SingularCovariance("conditioner covariance not invertible");
  }
  return llt.solve(tw);
}

double schur_mmse(const CovMatrix& cov, Var target, std::span<const Var> conditioners) {
  const double var_t = cov(target, target);
  if (conditioners.empty()) return var_t;
  const Eigen::VectorXd coeff = mmse_coefficients(cov, target, conditioners);
  double explained = 0.0;
  for (std::size_t i = 0; i < conditioners.size(); ++i) {
    explained += coeff(static_cast<Eigen::Index>(i)) * cov(target, conditioners[i]);
  }
  return std::max(0.0, var_t - explained);
}

double schur_mmse(const CovMatrix& cov, Var target, std::initializer_list<Var> conditioners) {
  return schur_mmse(cov, target,
                    std::span<const Var>(conditioners.begin(), conditioners.size()));
}

CovMatrix markov_triple_covariance(double var_x, double var_y, double var_z, double corr_xy,
                                   double corr_yz) {
  if (!(var_x > 0.0 && var_y > 0.0 && var_z > 0.0)) {
    throw InvalidParams("Markov triple variances must be > 0");
  }
  check_correlation(corr_xy, "corr(X,Y)");
  check_correlation(corr_yz, "corr(Y,Z)");

  const double cxy = corr_xy * std::sqrt(var_x * var_y);
  const double cyz = corr_yz * std::sqrt(var_y * var_z);
  const double cxz = corr_xy * corr_yz * std::sqrt(var_x * var_z);
  Eigen::Matrix3d m;
  m << var_x, cxy, cxz,
       cxy, var_y, cyz,
       cxz, cyz, var_z;
  return CovMatrix({Var::X, Var::Y, Var::Z}, m);
}

}  // namespace witsopt
