#pragma once

// Flat complex torus (C^n / L Z^{2n}, omega = sqrt(-1) sum dz_i ^ dzbar_i)
// sampled on a periodic grid with N points per real axis.
//
// Real axes are ordered (x_1, y_1, x_2, y_2, ...), z_k = x_k + i y_k, and the
// first axis varies fastest in the linear point index.

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dhym/eigenops.hpp"

namespace dhym {

/// Second-difference scheme behind the discrete complex Hessian.
enum class Stencil {
  /// Every second derivative is a product of central first differences
  /// (spacing 2h on the diagonal). The operators commute and are skew-adjoint,
  /// so integrals of (alpha_phi + i omega)^n do not depend on phi exactly.
  conservative,
  /// Three-point second differences on repeated axes, central products on
  /// mixed axes. Smaller truncation error, no exact discrete invariants for n >= 2.
  compact,
};

std::string to_string(Stencil s);
Stencil stencil_from_string(const std::string& name);

inline constexpr int kMaxComplexDim = 3;

struct StencilTap {
  std::array<int, 2 * kMaxComplexDim> offset{};
  Complex coef;
};

class TorusGrid {
 public:
  TorusGrid(int n, int N, double L = 2.0 * std::numbers::pi,
            Stencil stencil = Stencil::conservative);

  int n() const noexcept { return n_; }
  int N() const noexcept { return N_; }
  double L() const noexcept { return L_; }
  double h() const noexcept { return L_ / N_; }
  Stencil stencil() const noexcept { return stencil_; }
  int axes() const noexcept { return 2 * n_; }
  std::size_t size() const noexcept { return size_; }
  /// L^{2n}
  double volume() const noexcept;
  /// h^{2n}
  double cell_volume() const noexcept;

  std::array<int, 2 * kMaxComplexDim> coords(std::size_t idx) const;
  std::size_t index(const std::array<int, 2 * kMaxComplexDim>& c) const;
  std::size_t shift(std::size_t idx, const std::array<int, 2 * kMaxComplexDim>& offset) const;
  double coordinate(std::size_t idx, int axis) const;

  /// Taps of d^2/dz_i dzbar_j.
  const std::vector<StencilTap>& hessian_taps(int i, int j) const;
  /// Taps of d/dz_i = (d/dx_i - i d/dy_i) / 2.
  const std::vector<StencilTap>& gradient_taps(int i) const;

  bool operator==(const TorusGrid& o) const noexcept {
    return n_ == o.n_ && N_ == o.N_ && L_ == o.L_ && stencil_ == o.stencil_;
  }

 private:
  int n_;
  int N_;
  double L_;
  Stencil stencil_;
  std::size_t size_;
  std::array<std::size_t, 2 * kMaxComplexDim> stride_{};
  struct Taps {
    std::vector<std::vector<StencilTap>> hessian;
    std::vector<std::vector<StencilTap>> gradient;
  };
  // Shared so grids copy cheaply alongside every Potential.
  std::shared_ptr<const Taps> taps_;
};

/// Real scalar field phi on the grid.
class Potential {
 public:
  explicit Potential(TorusGrid grid);
  Potential(TorusGrid grid, Eigen::VectorXd values);

  const TorusGrid& grid() const noexcept { return grid_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::VectorXd& values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  double mean() const;
  double sup() const { return values_.maxCoeff(); }
  double inf() const { return values_.minCoeff(); }
  double sup_abs() const { return values_.cwiseAbs().maxCoeff(); }
  double osc() const { return sup() - inf(); }

  Potential operator+(const Potential& o) const;
  Potential operator-(const Potential& o) const;
  Potential operator*(double s) const;
  Potential& operator+=(const Potential& o);
  Potential plus_constant(double c) const;

 private:
  TorusGrid grid_;
  Eigen::VectorXd values_;
};

/// Per-point n x n Hermitian matrices of (1,1)-form coefficients.
class HermitianField {
 public:
  explicit HermitianField(TorusGrid grid);

  const TorusGrid& grid() const noexcept { return grid_; }
  int n() const noexcept { return grid_.n(); }
  std::size_t size() const noexcept { return grid_.size(); }

  Eigen::Map<CMatrix> at(std::size_t idx);
  Eigen::Map<const CMatrix> at(std::size_t idx) const;

  HermitianField operator+(const HermitianField& o) const;
  HermitianField operator*(double s) const;
  /// max over points of |M - M^*|.
  double hermitian_residual() const;

 private:
  TorusGrid grid_;
  std::vector<Complex> data_;
};

HermitianField constant_field(const TorusGrid& grid, const CMatrix& m);

/// d^2 phi / dz_i dzbar_j by the grid's stencil; Hermitian by construction.
HermitianField complex_hessian(const Potential& phi);

/// alpha + sqrt(-1) ddbar phi.
HermitianField alpha_phi(const HermitianField& alpha, const Potential& phi);

/// Eigenvalues (descending) of every point as columns of an n x P matrix.
Eigen::MatrixXd pointwise_eigenvalues(const HermitianField& field);

struct PhaseFields {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd min_eigenvalue;
};

PhaseFields pointwise_phase(const HermitianField& field);
PhaseFields pointwise_phase(const Eigen::MatrixXd& eigenvalues);

/// (alpha_phi + i omega)^n / omega^n = prod_k (lambda_k + i), pointwise.
struct VolumeRatios {
  Eigen::VectorXd re;
  Eigen::VectorXd im;
  /// 1 where sin Q <= 1e-12 (F_eps undefined there).
  std::vector<std::uint8_t> singular;

  /// Re/Im of e^{-i angle} prod_k (lambda_k + i).
  VolumeRatios rotated(double angle) const;
  std::size_t singular_count() const;
};

VolumeRatios volume_ratios(const HermitianField& field);
VolumeRatios volume_ratios(const Eigen::MatrixXd& eigenvalues);

/// h^{2n} sum(values), pairwise-summed.
double integrate(const Eigen::VectorXd& density, const TorusGrid& grid);

// Potential recipes.

/// a cos(2 pi k.x / L + phase), with k an integer wave vector over real axes.
struct TrigTerm {
  double amplitude = 0.0;
  std::array<int, 2 * kMaxComplexDim> wave{};
  double phase = 0.0;
};

Potential trig_potential(const TorusGrid& grid, std::span<const TrigTerm> terms);

/// a prod_axes exp(kappa (cos(2 pi (x_a - c_a)/L) - 1)), kappa = (L / (2 pi w))^2.
/// A smooth periodic bump of width w centered at c.
struct PeriodicBump {
  double amplitude = 0.0;
  std::array<double, 2 * kMaxComplexDim> center{};
  double width = 1.0;
};

Potential bump_potential(const TorusGrid& grid, std::span<const PeriodicBump> bumps);

}  // namespace dhym
