#include "dhym/eigenops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "dhym/error.hpp"

namespace dhym {

namespace {

constexpr double kSingularSin = 1e-12;

void require_finite(std::span<const double> lambda) {
  if (lambda.empty()) throw InvalidInput("phase vector must have length >= 1");
  for (double x : lambda) {
    if (!std::isfinite(x)) throw InvalidInput("phase vector entries must be finite");
  }
}

double max_entry(std::span<const double> lambda) {
  return *std::max_element(lambda.begin(), lambda.end());
}

// Shared scalars of F_eps and its derivatives.
struct TwistedScalars {
  double q;        // phase Q
  double s;        // csc Q
  double c;        // cot Q
  double inv_mod;  // 1 / prod sqrt(1 + lambda^2)
};

TwistedScalars twisted_scalars(std::span<const double> lambda) {
  require_finite(lambda);
  const PolarProduct pp = polar_product(lambda);
  const double sq = std::sin(pp.phase);
  if (sq <= kSingularSin) {
    std::ostringstream os;
    os << "singular phase: sin Q = " << sq << " (Q = " << pp.phase << ")";
    throw SingularPhase(os.str());
  }
  return {pp.phase, 1.0 / sq, std::cos(pp.phase) / sq, std::exp(-pp.log_modulus)};
}

double hermitian_residual(const CMatrix& m) {
  return (m - m.adjoint()).norm();
}

}  // namespace

double arccot(double x) {
  if (!std::isfinite(x)) throw InvalidInput("arccot: non-finite argument");
  return std::numbers::pi / 2.0 - std::atan(x);
}

PhaseVector::PhaseVector(std::vector<double> entries) : v_(std::move(entries)) {
  require_finite(v_);
  std::sort(v_.begin(), v_.end(), std::greater<>());
}

PhaseVector::PhaseVector(std::initializer_list<double> entries)
    : PhaseVector(std::vector<double>(entries)) {}

PhaseVector::PhaseVector(const Eigen::VectorXd& entries)
    : PhaseVector(std::vector<double>(entries.data(), entries.data() + entries.size())) {}

Eigen::VectorXd PhaseVector::to_eigen() const {
  return Eigen::Map<const Eigen::VectorXd>(v_.data(), static_cast<Eigen::Index>(v_.size()));
}

ConeSpec::ConeSpec(double theta, double Theta) : theta_(theta), Theta_(Theta) {
  if (!(0.0 < theta && theta < Theta && Theta < std::numbers::pi)) {
    throw InvalidInput("cone requires 0 < theta < Theta < pi");
  }
}

ReIm PolarProduct::cartesian() const {
  const double mod = std::exp(log_modulus);
  return {mod * std::cos(phase), mod * std::sin(phase)};
}

double phase_q(std::span<const double> lambda) {
  require_finite(lambda);
  double q = 0.0;
  for (double x : lambda) q += arccot(x);
  return q;
}

double phase_p(std::span<const double> lambda) {
  // max_k sum_{i != k} arccot(lambda_i): drop the smallest angle, i.e. the
  // largest eigenvalue.
  return phase_q(lambda) - arccot(max_entry(lambda));
}

double phase_qhat(std::span<const double> lambda) {
  return static_cast<double>(lambda.size()) * std::numbers::pi / 2.0 - phase_q(lambda);
}

double phase_q(const PhaseVector& lambda) { return phase_q(lambda.entries()); }
double phase_p(const PhaseVector& lambda) { return phase_p(lambda.entries()); }
double phase_qhat(const PhaseVector& lambda) { return phase_qhat(lambda.entries()); }

ConeMembership in_cone(std::span<const double> lambda, const ConeSpec& cone) {
  const double q = phase_q(lambda);
  const double p = q - arccot(max_entry(lambda));
  const double margin = std::min(cone.theta() - p, cone.Theta() - q);
  return {p < cone.theta() && q < cone.Theta(), margin};
}

ConeMembership in_cone(const PhaseVector& lambda, const ConeSpec& cone) {
  return in_cone(lambda.entries(), cone);
}

PolarProduct polar_product(std::span<const double> lambda) {
  require_finite(lambda);
  double log_mod = 0.0;
  double phase = 0.0;
  for (double x : lambda) {
    log_mod += std::log(std::hypot(1.0, x));
    phase += arccot(x);
  }
  return {log_mod, phase};
}

ReIm product_re_im(std::span<const double> lambda) {
  return polar_product(lambda).cartesian();
}

ReIm product_re_im(const PhaseVector& lambda) { return product_re_im(lambda.entries()); }

ReIm product_re_im_cartesian(std::span<const double> lambda) {
  require_finite(lambda);
  Complex prod{1.0, 0.0};
  for (double x : lambda) prod *= Complex{x, 1.0};
  return {prod.real(), prod.imag()};
}

double f_eps(std::span<const double> lambda, double eps) {
  const TwistedScalars t = twisted_scalars(lambda);
  return t.c + eps * t.s * t.inv_mod;
}

double f_eps(const PhaseVector& lambda, double eps) { return f_eps(lambda.entries(), eps); }

Eigen::VectorXd grad_f_eps(std::span<const double> lambda, double eps) {
  const TwistedScalars t = twisted_scalars(lambda);
  Eigen::VectorXd g(static_cast<Eigen::Index>(lambda.size()));
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double u = 1.0 / (1.0 + lambda[i] * lambda[i]);
    g[static_cast<Eigen::Index>(i)] =
        t.s * t.s * u + eps * t.s * (t.c - lambda[i]) * u * t.inv_mod;
  }
  return g;
}

Eigen::VectorXd grad_f_eps(const PhaseVector& lambda, double eps) {
  return grad_f_eps(lambda.entries(), eps);
}

Eigen::MatrixXd hess_f_eps(std::span<const double> lambda, double eps) {
  const TwistedScalars t = twisted_scalars(lambda);
  const auto n = static_cast<Eigen::Index>(lambda.size());
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = 1.0 / (1.0 + lambda[i] * lambda[i]);

  const double s = t.s;
  const double c = t.c;
  const double s2 = s * s;
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double li = lambda[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const double lj = lambda[static_cast<std::size_t>(j)];
      // d/dlambda_j of csc^2 Q u_i
      double cot_part = 2.0 * s2 * c * u[i] * u[j];
      // d/dlambda_j of eps csc Q (cot Q - lambda_i) u_i / prod
      double twist = s * u[i] * u[j] * ((c - li) * (c - lj) + s2);
      if (i == j) {
        cot_part -= 2.0 * s2 * li * u[i] * u[i];
        twist -= s * u[i] + 2.0 * s * (c - li) * li * u[i] * u[i];
      }
      h(i, j) = cot_part + eps * t.inv_mod * twist;
    }
  }
  // Exact symmetry; the two triangles agree analytically.
  return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd hess_f_eps(const PhaseVector& lambda, double eps) {
  return hess_f_eps(lambda.entries(), eps);
}

double TwistedDerivatives::second(std::size_t i, std::size_t j, std::size_t p,
                                  std::size_t q) const {
  const std::size_t n = dim();
  return matrix_second[((i * n + j) * n + p) * n + q];
}

TwistedDerivatives matrix_derivatives(const PhaseVector& lambda, double eps) {
  TwistedDerivatives d;
  const std::size_t n = lambda.size();
  d.value = f_eps(lambda, eps);
  d.grad = grad_f_eps(lambda, eps);
  d.hess = hess_f_eps(lambda, eps);
  d.matrix_first = d.grad.asDiagonal();
  d.matrix_second.assign(n * n * n * n, 0.0);

  auto idx = [n](std::size_t i, std::size_t j, std::size_t p, std::size_t q) {
    return ((i * n + j) * n + p) * n + q;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < n; ++p) {
      d.matrix_second[idx(i, i, p, p)] =
          d.hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const double gap = lambda[i] - lambda[j];
      double quotient;
      if (std::abs(gap) < kDividedDifferenceGap) {
        quotient = 0.5 * (d.hess(ii, ii) + d.hess(jj, jj)) - d.hess(ii, jj);
      } else {
        quotient = (d.grad[ii] - d.grad[jj]) / gap;
      }
      // delta_{iq} delta_{jp}: (i, j, p = j, q = i)
      d.matrix_second[idx(i, j, j, i)] += quotient;
    }
  }
  return d;
}

PhaseVector hermitian_eigenvalues(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidInput("matrix must be square");
  const double scale = std::max(1.0, m.norm());
  if (hermitian_residual(m) > 1e-12 * scale) throw InvalidInput("matrix is not Hermitian");
  const Eigen::Index n = m.rows();
  if (n == 1) return PhaseVector{m(0, 0).real()};
  if (n == 2) {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const double mean = 0.5 * (a + d);
    const double rad = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
    return PhaseVector{mean + rad, mean - rad};
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw InvalidInput("Hermitian eigensolve failed");
  return PhaseVector(Eigen::VectorXd(es.eigenvalues()));
}

HermitianPencil::HermitianPencil(CMatrix a, CMatrix b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || b_.rows() != b_.cols() || a_.rows() != b_.rows() ||
      a_.rows() == 0) {
    throw InvalidInput("pencil matrices must be square and of equal size");
  }
  if (hermitian_residual(a_) > 1e-12 * std::max(1.0, a_.norm()) ||
      hermitian_residual(b_) > 1e-12 * std::max(1.0, b_.norm())) {
    throw InvalidInput("pencil matrices must be Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || !(es.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidInput("pencil matrix A is not positive definite");
  }
}

PhaseVector gen_eigenvalues(const HermitianPencil& pencil) {
  Eigen::LLT<CMatrix> llt(pencil.a());
  if (llt.info() != Eigen::Success) throw InvalidInput("pencil matrix A is not positive definite");
  const auto& l = llt.matrixL();
  // C = L^{-1} B L^{-*} shares the eigenvalues of A^{-1/2} B A^{-1/2}.
  CMatrix c = l.solve(pencil.b());
  c = l.solve(c.adjoint().eval()).adjoint();
  c = 0.5 * (c + c.adjoint()).eval();
  return hermitian_eigenvalues(c);
}

}  // namespace dhym
