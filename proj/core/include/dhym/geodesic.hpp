#pragma once

// eps-geodesics between potentials on X x [0, 1].
//
// At an interior slice t_k the lifted (n+1) x (n+1) Hermitian matrix is
//
//   M = [ alpha_phi        w     ]     w_i   = -e^t d_{z_i} phi_t / (2 eps)
//       [ w^*        kappa       ]     kappa = e^{2t} phi_tt / (4 eps^2)
//
// and the eps-geodesic equation reads Qhat(M) = sum_k atan(mu_k) = theta0_hat.
// With X = I + i alpha_phi and v = d phi_t this is equivalent to
//
//   phi_tt Re(e^{-i theta0_hat} det X) + Im(e^{-i theta0_hat} v^* adj(X) v)
//     + 4 eps^2 e^{-2t} Im(e^{-i theta0_hat} det X) = 0,
//
// since the left side equals 4 eps^2 e^{-2t} Im(e^{-i theta0_hat} det(I + i M)).

#include <span>
#include <vector>

#include "dhym/functionals.hpp"

namespace dhym {

/// phi(t_k, .) on t_k = k / M, k = 0..M; slices 0 and M are the endpoints.
class PathPotential {
 public:
  /// Linear interpolation (1 - t) phi0 + t phi1.
  PathPotential(const Potential& phi0, const Potential& phi1, int slices);

  int slices() const noexcept { return static_cast<int>(slices_.size()) - 1; }
  double dt() const noexcept { return 1.0 / slices(); }
  double time(int k) const noexcept { return static_cast<double>(k) / slices(); }
  const TorusGrid& grid() const noexcept { return slices_.front().grid(); }

  const Potential& slice(int k) const { return slices_.at(static_cast<std::size_t>(k)); }
  /// Interior slices only; the endpoints stay bit-identical to the inputs.
  Potential& interior(int k);

  /// Interior values stacked slice by slice.
  Eigen::VectorXd interior_vector() const;
  void set_interior(const Eigen::VectorXd& v);

 private:
  std::vector<Potential> slices_;
};

struct GeodesicConfig {
  double eps = 0.1;
  int slices = 32;
  /// stop once max |Qhat(M) - theta0_hat| < tol
  double tol = 1e-10;
  int max_iterations = 200;
  /// initial pseudo-time step; grows toward a Newton step as the residual falls
  double initial_ds = 1.0;
  double max_ds = 1e14;
};

struct GeodesicReport {
  double eps = 0.0;
  int slices = 0;
  bool converged = false;
  int iterations = 0;
  int rejections = 0;
  /// max |Qhat(M) - theta0_hat| over interior points
  double residual = 0.0;
  /// max |eqn residual| / max term size, from the X, v form above
  double eqn_residual = 0.0;
  /// max |eqn residual - 4 eps^2 e^{-2t} Im(e^{-i theta0_hat} det(I + i M))|
  double identity_residual = 0.0;
  /// min over interior points of phi_tt
  double min_phi_tt = 0.0;
  /// max over slice midpoints of |phi_t|
  double max_phi_t = 0.0;
  /// min over slices of the H margin min(Q, Theta0 - Q)
  double path_margin = 0.0;
};

CMatrix lifted_matrix(const CalibrationData& cal, const PathPotential& path, double eps, int k,
                      std::size_t point);

/// Pseudo-time relaxation with the endpoint slices pinned, linearly implicit
/// in s. The driving residual is the determinant form above divided by its
/// phi_tt coefficient Re(e^{-i theta0_hat} det X) > 0; it vanishes exactly
/// where Qhat(M) = theta0_hat.
/// Stops once max |Qhat(M) - theta0_hat| < tol. Throws PathExit when the
/// initial interpolation leaves H and NonConvergence when the budget runs out.
struct GeodesicSolution {
  PathPotential path;
  GeodesicReport report;
};

GeodesicSolution solve_eps_geodesic(const CalibrationData& cal, const Potential& phi0,
                                    const Potential& phi1, const GeodesicConfig& config);

/// Residual diagnostics of an arbitrary path (no solve).
GeodesicReport inspect_path(const CalibrationData& cal, const PathPotential& path, double eps);

/// E_p and E_{p,delta} at slice midpoints t_{k+1/2}, k = 0..M-1.
struct EnergyProfile {
  std::vector<double> t;
  std::vector<double> e_p;
  std::vector<double> e_p_delta;

  double spread_delta() const;
};

inline constexpr double kDefaultDelta = 1e-3;

EnergyProfile energy_profile(const CalibrationData& cal, const PathPotential& path, double p,
                             double delta = kDefaultDelta);
/// sum_k dt E_p(t_{k+1/2})^{1/p}
double length_p(const CalibrationData& cal, const PathPotential& path, double p);

struct DpEstimate {
  std::vector<double> eps;
  std::vector<double> lengths;
  std::vector<GeodesicReport> reports;
  /// eps^2 Richardson extrapolation from the two smallest eps
  double extrapolated = 0.0;
};

inline const std::vector<double> kDefaultEpsSchedule{0.2, 0.1, 0.05};

DpEstimate estimate_dp(const CalibrationData& cal, const Potential& phi0, const Potential& phi1,
                       double p, const std::vector<double>& schedule = kDefaultEpsSchedule,
                       GeodesicConfig config = {});

/// Richardson extrapolation to eps = 0 assuming values = v0 + c eps^2, from
/// the last two entries.
double extrapolate_eps2(std::span<const double> eps, std::span<const double> values);

/// The two endpoint integrals
///   int_{phi0 > phi1} |phi0 - phi1|^p Re(e^{-i theta0}(alpha_{phi0} + i omega)^n)
/// and the same with the roles of phi0, phi1 exchanged.
struct DpLowerBound {
  double from_phi0 = 0.0;
  double from_phi1 = 0.0;
  double value() const { return from_phi0 > from_phi1 ? from_phi0 : from_phi1; }
};

DpLowerBound dp_lower_bound(const CalibrationData& cal, const Potential& phi0,
                            const Potential& phi1, double p);

}  // namespace dhym
