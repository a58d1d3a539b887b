#pragma once

// Twisted dHYM flow  d phi / dt = F_eps(alpha_phi) - cot(theta0) - a0 eps,
// explicit RK4 with a diffusion CFL step and step rejection on cone exit.

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "dhym/functionals.hpp"

namespace dhym {

enum class DtPolicy { cfl, fixed };

struct FlowConfig {
  double eps = 1e-3;
  DtPolicy policy = DtPolicy::cfl;
  /// dt = cfl h^2 / max_x max_i F_i
  double cfl = 0.2;
  /// used when policy == fixed
  double dt = 1e-3;
  double t_end = 10.0;
  /// stop once sup |F - cot theta0 - a0 eps| < tol
  double tol = 1e-8;
  /// record a sample every this many accepted steps
  int monitor_every = 1;
  /// evaluate J_eps and Im Z at samples
  bool monitor_functionals = true;
  /// Gauss nodes for the monitored functionals; 2 is exact for n <= 3
  int functional_nodes = 2;
  std::vector<double> snapshot_times;
  long max_steps = 5'000'000;
};

/// Pointwise right-hand side with the data the monitors and the CFL need.
struct RhsEval {
  Potential rhs;
  PointwiseForms forms;
  /// F_eps(alpha_phi) per point
  Eigen::VectorXd f;
  /// max over points of max_i dF_eps / d lambda_i
  double max_grad = 0.0;
  /// min over points of min(Q, Theta0 - Q)
  double cone_margin = 0.0;
};

/// Throws ConeExit naming the first point with Q outside (0, Theta0).
RhsEval evaluate_rhs(const CalibrationData& cal, const Potential& phi, double eps);
Potential rhs(const CalibrationData& cal, const Potential& phi, double eps);

double cfl_dt(const TorusGrid& grid, double max_grad, double cfl);

struct StepResult {
  Potential phi;
  double dt_used = 0.0;
  int rejections = 0;
};

/// One RK4 step; halves dt while a stage or the result leaves the cone.
/// Throws Stiffness once dt falls below 1e-12.
StepResult step(const CalibrationData& cal, const Potential& phi, double dt, double eps);

struct FlowSample {
  long step = 0;
  double t = 0.0;
  /// size of the step that produced this sample (0 at t = 0)
  double dt = 0.0;
  double j_eps = 0.0;
  double im_z = 0.0;
  double min_q = 0.0;
  double max_q = 0.0;
  double min_f = 0.0;
  double max_f = 0.0;
  double min_lambda = 0.0;
  double osc_phidot = 0.0;
  double sup_phidot = 0.0;
  double sup_phi = 0.0;
  /// -int phidot^2 Im(alpha_phi + i omega)^n
  double dissipation = 0.0;
  /// int phidot Im(alpha_phi + i omega)^n
  double weighted_phidot = 0.0;
};

struct FlowTrace {
  std::vector<FlowSample> samples;
  std::vector<std::pair<double, Potential>> snapshots;
  /// Running F range over every accepted step, not only sampled ones.
  double running_min_f = 0.0;
  double running_max_f = 0.0;
  double running_min_q = 0.0;
  double running_max_q = 0.0;
  double running_min_lambda = 0.0;
  bool converged = false;
  long steps = 0;
  long rejections = 0;
  std::optional<Potential> final_phi;

  /// Least-squares slope of log(osc phidot) against t over the second half.
  double decay_slope() const;
  /// max over consecutive sample pairs of
  ///   |dJ/dt - trapezoid(dissipation)| / |trapezoid(dissipation)|
  /// restricted to pairs one step apart.
  double max_dissipation_mismatch() const;
};

FlowTrace run(const CalibrationData& cal, const Potential& phi0, const FlowConfig& config);

void write_trace_csv(std::ostream& os, const FlowTrace& trace);

}  // namespace dhym
