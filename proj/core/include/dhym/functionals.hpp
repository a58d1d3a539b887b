#pragma once

// Class constants of a reference form alpha and the energy functionals on the
// space H of almost calibrated potentials.
//
// All line-integral functionals are evaluated along the straight path t*phi
// with Gauss-Legendre nodes in t. Their integrands are polynomials of degree
// n in t, so any rule with m >= (n + 1) / 2 nodes is exact.

#include <vector>

#include "dhym/torus.hpp"

namespace dhym {

struct CalibrationData {
  HermitianField alpha;
  /// tan(theta0) omega + alpha
  HermitianField chi;
  double theta0 = 0.0;
  /// n pi / 2 - theta0
  double theta0_hat = 0.0;
  /// theta0 + pi / 2
  double Theta0 = 0.0;
  /// Vol / int Im(alpha + i omega)^n
  double a0 = 0.0;
  double cot_theta0 = 0.0;

  const TorusGrid& grid() const noexcept { return alpha.grid(); }
  int n() const noexcept { return alpha.n(); }
};

/// theta0 = arg int (alpha + i omega)^n. Throws DegenerateClass when the
/// integral vanishes and NotHypercritical when theta0 is outside (0, pi/2).
CalibrationData compute_theta0(const HermitianField& alpha);

/// Eigen-data of alpha_phi at every grid point.
struct PointwiseForms {
  Eigen::MatrixXd eigenvalues;
  PhaseFields phase;
  VolumeRatios volume;
};

PointwiseForms evaluate_forms(const HermitianField& field);
PointwiseForms evaluate_forms(const CalibrationData& cal, const Potential& phi);

struct Membership {
  bool inside = false;
  /// min over the grid of min(Q - c, Theta0 - Q)
  double margin = 0.0;
};

/// phi in H_c: Q(alpha_phi) in (c, Theta0) at every point. c = 0 gives H.
Membership membership(const CalibrationData& cal, const Potential& phi, double c);
Membership membership(const CalibrationData& cal, const PointwiseForms& forms, double c);

/// min over the grid of sin Q - min(sin c, cos theta0); nonnegative on H_c.
double hc_positivity_slack(const CalibrationData& cal, const PointwiseForms& forms, double c);

inline constexpr int kDefaultNodes = 16;

double j_eps(const CalibrationData& cal, const Potential& phi, double eps,
             int nodes = kDefaultNodes);
double j0(const CalibrationData& cal, const Potential& phi, int nodes = kDefaultNodes);
/// J from Im(e^{-i theta0_hat} (omega + i alpha_phi)^n), evaluated through
/// prod(1 + i lambda_k) independently of j0.
double j(const CalibrationData& cal, const Potential& phi, int nodes = kDefaultNodes);
/// J_0(u) + eps int_0^1 int u (a0 Im(alpha_{tu} + i omega)^n - omega^n) dt
double j_eps_split(const CalibrationData& cal, const Potential& phi, double eps,
                   int nodes = kDefaultNodes);
double im_z(const CalibrationData& cal, const Potential& phi, int nodes = kDefaultNodes);

struct EnergyPair {
  double j_eps = 0.0;
  double im_z = 0.0;
};

/// J_eps and Im Z from one pass over the path nodes.
EnergyPair j_eps_and_im_z(const CalibrationData& cal, const Potential& phi, double eps,
                          int nodes = kDefaultNodes);

/// J(phi) - delta int(-phi)(Im(alpha_phi + i omega)^n - Im(alpha + i omega)^n) + C
double coercivity_gap(const CalibrationData& cal, const Potential& phi, double delta,
                      double big_c, int nodes = kDefaultNodes);

/// min over the grid of Im(alpha_{s phi} + i omega)^n / Im(alpha_phi + i omega)^n
double s_im_control_ratio(const CalibrationData& cal, const Potential& phi, double s);

/// The two sides of the coerciveness estimate
///   path >= (a0 / C) endpoint - C.
struct CoercivenessTerms {
  /// int_0^1 int (-phi)(a0 Im(alpha_{t phi} + i omega)^n - omega^n) dt
  double path = 0.0;
  /// int (-phi)(Im(alpha_phi + i omega)^n - Im(alpha + i omega)^n)
  double endpoint = 0.0;
};

CoercivenessTerms coerciveness_terms(const CalibrationData& cal, const Potential& phi,
                                     int nodes = kDefaultNodes);

/// Smallest C > 0 with path >= (a0 / C) endpoint - C on every sample.
double calibrate_coerciveness_constant(const std::vector<CoercivenessTerms>& samples,
                                       double a0);

}  // namespace dhym
