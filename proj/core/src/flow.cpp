#include "dhym/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "dhym/error.hpp"

namespace dhym {

namespace {

constexpr double kMinDt = 1e-12;

struct Attempt {
  Potential phi;
  RhsEval eval;
};

// RK4 from phi with first stage k1; empty when a stage leaves the cone.
std::optional<Attempt> rk4_attempt(const CalibrationData& cal, const Potential& phi,
                                   const Potential& k1, double dt, double eps) {
  try {
    const Potential k2 = rhs(cal, phi + k1 * (0.5 * dt), eps);
    const Potential k3 = rhs(cal, phi + k2 * (0.5 * dt), eps);
    const Potential k4 = rhs(cal, phi + k3 * dt, eps);
    Potential next(phi.grid(),
                   phi.values() + (dt / 6.0) * (k1.values() + 2.0 * k2.values() +
                                                2.0 * k3.values() + k4.values()));
    RhsEval eval = evaluate_rhs(cal, next, eps);
    return Attempt{std::move(next), std::move(eval)};
  } catch (const ConeExit&) {
    return std::nullopt;
  }
}

FlowSample make_sample(const CalibrationData& cal, const Potential& phi, const RhsEval& e,
                       long step, double t, double dt, const FlowConfig& config) {
  FlowSample s;
  s.step = step;
  s.t = t;
  s.dt = dt;
  if (config.monitor_functionals) {
    const EnergyPair ep = j_eps_and_im_z(cal, phi, config.eps, config.functional_nodes);
    s.j_eps = ep.j_eps;
    s.im_z = ep.im_z;
  }
  s.min_q = e.forms.phase.q.minCoeff();
  s.max_q = e.forms.phase.q.maxCoeff();
  s.min_f = e.f.minCoeff();
  s.max_f = e.f.maxCoeff();
  s.min_lambda = e.forms.phase.min_eigenvalue.minCoeff();
  const Eigen::VectorXd& v = e.rhs.values();
  s.osc_phidot = v.maxCoeff() - v.minCoeff();
  s.sup_phidot = v.cwiseAbs().maxCoeff();
  s.sup_phi = phi.sup_abs();
  const Eigen::VectorXd& im = e.forms.volume.im;
  s.dissipation = -integrate(v.cwiseProduct(v).cwiseProduct(im), cal.grid());
  s.weighted_phidot = integrate(v.cwiseProduct(im), cal.grid());
  return s;
}

void widen(FlowTrace& tr, const RhsEval& e) {
  tr.running_min_f = std::min(tr.running_min_f, e.f.minCoeff());
  tr.running_max_f = std::max(tr.running_max_f, e.f.maxCoeff());
  tr.running_min_q = std::min(tr.running_min_q, e.forms.phase.q.minCoeff());
  tr.running_max_q = std::max(tr.running_max_q, e.forms.phase.q.maxCoeff());
  tr.running_min_lambda = std::min(tr.running_min_lambda, e.forms.phase.min_eigenvalue.minCoeff());
}

}  // namespace

RhsEval evaluate_rhs(const CalibrationData& cal, const Potential& phi, double eps) {
  RhsEval out{Potential(phi.grid()), evaluate_forms(cal, phi), Eigen::VectorXd(), 0.0, 0.0};
  const PointwiseForms& f = out.forms;
  const auto count = static_cast<Eigen::Index>(phi.grid().size());
  const Eigen::Index n = f.eigenvalues.rows();
  const double shift = cal.cot_theta0 + cal.a0 * eps;
  out.f.resize(count);
  out.cone_margin = std::numeric_limits<double>::infinity();
  double max_grad = 0.0;
  for (Eigen::Index p = 0; p < count; ++p) {
    const double q = f.phase.q[p];
    const double margin = std::min(q, cal.Theta0 - q);
    if (!(margin > 0.0)) {
      std::ostringstream os;
      os << "cone exit at point " << p << ": Q = " << q << ", margin " << margin;
      throw ConeExit(os.str(), static_cast<long>(p), margin);
    }
    out.cone_margin = std::min(out.cone_margin, margin);
    const double re = f.volume.re[p];
    const double im = f.volume.im[p];
    const double r = std::hypot(re, im);
    const double s = r / im;  // csc Q
    const double c = re / im;  // cot Q
    out.f[p] = (re + eps) / im;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lam = f.eigenvalues(i, p);
      const double u = 1.0 / (1.0 + lam * lam);
      max_grad = std::max(max_grad, s * s * u + eps * s * (c - lam) * u / r);
    }
  }
  out.max_grad = max_grad;
  out.rhs.values() = out.f.array() - shift;
  return out;
}

Potential rhs(const CalibrationData& cal, const Potential& phi, double eps) {
  return evaluate_rhs(cal, phi, eps).rhs;
}

double cfl_dt(const TorusGrid& grid, double max_grad, double cfl) {
  if (!(cfl > 0.0)) throw InvalidInput("cfl factor must be positive");
  if (!(max_grad > 0.0)) throw InvalidInput("operator is not elliptic: max dF/dlambda <= 0");
  return cfl * grid.h() * grid.h() / max_grad;
}

StepResult step(const CalibrationData& cal, const Potential& phi, double dt, double eps) {
  if (!(dt > 0.0)) throw InvalidInput("time step must be positive");
  const Potential k1 = rhs(cal, phi, eps);
  StepResult out{phi, dt, 0};
  for (;;) {
    if (auto a = rk4_attempt(cal, phi, k1, out.dt_used, eps)) {
      out.phi = std::move(a->phi);
      return out;
    }
    out.dt_used *= 0.5;
    ++out.rejections;
    if (out.dt_used < kMinDt) throw Stiffness("time step underflow below 1e-12");
  }
}

FlowTrace run(const CalibrationData& cal, const Potential& phi0, const FlowConfig& config) {
  if (!(config.eps >= 0.0)) throw InvalidInput("eps must be >= 0");
  if (config.policy == DtPolicy::fixed && !(config.dt > 0.0)) {
    throw InvalidInput("fixed time step must be positive");
  }
  if (!(config.t_end >= 0.0)) throw InvalidInput("t_end must be >= 0");
  if (config.monitor_every < 1) throw InvalidInput("monitor cadence must be >= 1");

  std::vector<double> snaps = config.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  FlowTrace tr;
  Potential phi = phi0;
  RhsEval cur = evaluate_rhs(cal, phi, config.eps);
  tr.running_min_f = tr.running_max_f = cur.f[0];
  tr.running_min_q = tr.running_max_q = cur.forms.phase.q[0];
  tr.running_min_lambda = cur.forms.phase.min_eigenvalue[0];
  widen(tr, cur);
  tr.samples.push_back(make_sample(cal, phi, cur, 0, 0.0, 0.0, config));

  double t = 0.0;
  auto take_snapshots = [&]() {
    while (next_snap < snaps.size() && snaps[next_snap] <= t + 1e-12) {
      tr.snapshots.emplace_back(t, phi);
      ++next_snap;
    }
  };
  take_snapshots();

  tr.converged = cur.rhs.sup_abs() < config.tol;
  while (!tr.converged && t < config.t_end && tr.steps < config.max_steps) {
    double dt = config.policy == DtPolicy::cfl ? cfl_dt(phi.grid(), cur.max_grad, config.cfl)
                                               : config.dt;
    dt = std::min(dt, config.t_end - t);
    if (next_snap < snaps.size()) dt = std::min(dt, snaps[next_snap] - t);

    std::optional<Attempt> a;
    for (;;) {
      a = rk4_attempt(cal, phi, cur.rhs, dt, config.eps);
      if (a) break;
      dt *= 0.5;
      ++tr.rejections;
      if (dt < kMinDt) throw Stiffness("time step underflow below 1e-12");
    }
    phi = std::move(a->phi);
    cur = std::move(a->eval);
    t = (config.t_end - t - dt <= 1e-14 * std::max(1.0, config.t_end)) ? config.t_end : t + dt;
    ++tr.steps;
    widen(tr, cur);
    take_snapshots();

    tr.converged = cur.rhs.sup_abs() < config.tol;
    const bool last = tr.converged || t >= config.t_end || tr.steps >= config.max_steps;
    if (tr.steps % config.monitor_every == 0 || last) {
      tr.samples.push_back(make_sample(cal, phi, cur, tr.steps, t, dt, config));
    }
  }
  tr.final_phi = phi;
  return tr;
}

double FlowTrace::decay_slope() const {
  if (samples.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double half = 0.5 * samples.back().t;
  double n = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const FlowSample& s : samples) {
    if (s.t < half || !(s.osc_phidot > 0.0)) continue;
    const double y = std::log(s.osc_phidot);
    n += 1.0;
    sx += s.t;
    sy += y;
    sxx += s.t * s.t;
    sxy += s.t * y;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2.0 || den <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

double FlowTrace::max_dissipation_mismatch() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const FlowSample& a = samples[i - 1];
    const FlowSample& b = samples[i];
    if (b.step != a.step + 1) continue;
    const double djdt = (b.j_eps - a.j_eps) / (b.t - a.t);
    const double avg = 0.5 * (a.dissipation + b.dissipation);
    worst = std::max(worst, std::abs(djdt - avg) / std::abs(avg));
  }
  return worst;
}

void write_trace_csv(std::ostream& os, const FlowTrace& trace) {
  os << "step,t,dt,j_eps,im_z,min_q,max_q,min_f,max_f,min_lambda,osc_phidot,sup_phidot,"
        "sup_phi,dissipation,weighted_phidot\n";
  os << std::setprecision(17);
  for (const FlowSample& s : trace.samples) {
    os << s.step << ',' << s.t << ',' << s.dt << ',' << s.j_eps << ',' << s.im_z << ','
       << s.min_q << ',' << s.max_q << ',' << s.min_f << ',' << s.max_f << ',' << s.min_lambda
       << ',' << s.osc_phidot << ',' << s.sup_phidot << ',' << s.sup_phi << ','
       << s.dissipation << ',' << s.weighted_phidot << '\n';
  }
}

}  // namespace dhym
