#pragma once

// Pointwise algebra of the Lagrangian phase operators and the twisted
// operator F_eps on eigenvalue vectors and Hermitian pencils.
//
// Every kernel comes in two flavours: a span overload that accepts the
// eigenvalues in any order (used by the permutation-invariance tests), and a
// PhaseVector overload that works on the sorted representation.

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace dhym {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// Branch pi/2 - atan(x): continuous, strictly decreasing, range (0, pi).
double arccot(double x);

/// Ordered real n-vector of eigenvalues, sorted descending on construction.
class PhaseVector {
 public:
  explicit PhaseVector(std::vector<double> entries);
  PhaseVector(std::initializer_list<double> entries);
  explicit PhaseVector(const Eigen::VectorXd& entries);

  std::size_t size() const noexcept { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> entries() const noexcept { return v_; }
  double largest() const { return v_.front(); }
  double smallest() const { return v_.back(); }
  Eigen::VectorXd to_eigen() const;

 private:
  std::vector<double> v_;
};

/// Gamma_{theta,Theta} = { P < theta, Q < Theta } with 0 < theta < Theta < pi.
class ConeSpec {
 public:
  ConeSpec(double theta, double Theta);
  double theta() const noexcept { return theta_; }
  double Theta() const noexcept { return Theta_; }

 private:
  double theta_;
  double Theta_;
};

struct ConeMembership {
  bool inside;
  double margin;  ///< min(theta - P, Theta - Q); positive iff inside
};

/// Re and Im of prod_k (lambda_k + i).
struct ReIm {
  double re;
  double im;
};

/// prod_k (lambda_k + i) in polar form: modulus exp(log_modulus), argument Q.
struct PolarProduct {
  double log_modulus;
  double phase;
  ReIm cartesian() const;
};

double phase_q(std::span<const double> lambda);
double phase_p(std::span<const double> lambda);
double phase_qhat(std::span<const double> lambda);
double phase_q(const PhaseVector& lambda);
double phase_p(const PhaseVector& lambda);
double phase_qhat(const PhaseVector& lambda);

ConeMembership in_cone(std::span<const double> lambda, const ConeSpec& cone);
ConeMembership in_cone(const PhaseVector& lambda, const ConeSpec& cone);

PolarProduct polar_product(std::span<const double> lambda);
ReIm product_re_im(std::span<const double> lambda);
ReIm product_re_im(const PhaseVector& lambda);
/// Direct complex multiplication; only used as a cross-check for |lambda| <= 1e2.
ReIm product_re_im_cartesian(std::span<const double> lambda);

/// F_eps = (Re prod + eps) / Im prod, evaluated as cot Q + eps csc Q / prod|.|.
/// Throws SingularPhase when sin Q <= 1e-12.
double f_eps(std::span<const double> lambda, double eps);
double f_eps(const PhaseVector& lambda, double eps);
Eigen::VectorXd grad_f_eps(std::span<const double> lambda, double eps);
Eigen::VectorXd grad_f_eps(const PhaseVector& lambda, double eps);
Eigen::MatrixXd hess_f_eps(std::span<const double> lambda, double eps);
Eigen::MatrixXd hess_f_eps(const PhaseVector& lambda, double eps);

/// First and second matrix derivatives of F_eps at a diagonal point.
struct TwistedDerivatives {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  /// F^{i jbar}; diagonal in the eigenframe.
  Eigen::MatrixXd matrix_first;
  /// F^{i jbar, p qbar}, flattened as ((i*n + j)*n + p)*n + q.
  std::vector<double> matrix_second;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(grad.size()); }
  double second(std::size_t i, std::size_t j, std::size_t p, std::size_t q) const;
};

/// Below this gap the divided difference (F_i - F_j)/(lambda_i - lambda_j) is
/// replaced by its limit F_ii - F_ij.
inline constexpr double kDividedDifferenceGap = 1e-8;

TwistedDerivatives matrix_derivatives(const PhaseVector& lambda, double eps);

/// Eigenvalues of a Hermitian matrix, sorted descending.
PhaseVector hermitian_eigenvalues(const CMatrix& m);

/// Pair (A, B) with A Hermitian positive definite and B Hermitian.
class HermitianPencil {
 public:
  HermitianPencil(CMatrix a, CMatrix b);
  const CMatrix& a() const noexcept { return a_; }
  const CMatrix& b() const noexcept { return b_; }
  Eigen::Index dim() const noexcept { return a_.rows(); }

 private:
  CMatrix a_;
  CMatrix b_;
};

/// Eigenvalues of A^{-1/2} B A^{-1/2}, sorted descending.
PhaseVector gen_eigenvalues(const HermitianPencil& pencil);

}  // namespace dhym
