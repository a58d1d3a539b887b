#include "dhym/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "dhym/error.hpp"
#include "dhym/flow.hpp"
#include "dhym/geodesic.hpp"
#include "dhym/regularize.hpp"

namespace dhym {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs body(check); an escaping dhym::Error fails the check with its message.
template <class Body>
Check guarded(int criterion, std::string name, double limit, Body&& body) {
  Check c;
  c.criterion = criterion;
  c.name = std::move(name);
  c.limit = limit;
  const auto t0 = Clock::now();
  try {
    body(c);
  } catch (const Error& e) {
    c.passed = false;
    c.detail = std::string("error: ") + e.what();
  }
  c.seconds = since(t0);
  return c;
}

CalibrationData diag_class(int n, int N, double lambda, Stencil s = Stencil::conservative) {
  return compute_theta0(constant_field(TorusGrid(n, N, 2.0 * kPi, s),
                                       CMatrix::Identity(n, n) * lambda));
}

// ---------------------------------------------------------------- eigenops

constexpr double kTheta0Ref = 0.9272952180016122;  // atan(4/3)

// F_eps in extended precision for the finite-difference oracle; shift is added to entry k.
long double f_eps_extended(std::span<const double> lambda, int k, long double shift, double eps) {
  long double q = 0.0L, log_mod = 0.0L;
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    long double x = lambda[i];
    if (static_cast<int>(i) == k) x += shift;
    q += std::atan2(1.0L, x);
    log_mod += 0.5L * std::log1p(x * x);
  }
  return (std::cos(q) + static_cast<long double>(eps) * std::exp(-log_mod)) / std::sin(q);
}

Check gradient_check(std::uint64_t seed, SuiteReport& rep) {
  return guarded(3, "gradient check", 1e-6, [&](Check& c) {
    const double Theta = kTheta0Ref + kPi / 2;
    const double h = 1e-5;
    double worst = 0.0, worst_double = 0.0;
    std::uint64_t stream = 0;
    for (int n : {2, 4, 6}) {
      for (double eps : {0.0, 1e-3}) {
        ConeSampler sampler(n, ConeSpec(Theta - 0.2, Theta), seed + stream++);
        for (int s = 0; s < 1000; ++s) {
          const PhaseVector lam = sampler.next();
          const std::span<const double> v = lam.entries();
          const Eigen::VectorXd g = grad_f_eps(lam, eps);
          Eigen::VectorXd fd(n), fd_double(n);
          for (int k = 0; k < n; ++k) {
            fd[k] = static_cast<double>((f_eps_extended(v, k, h, eps) - f_eps_extended(v, k, -h, eps)) /
                                        (2.0L * h));
            std::vector<double> w(v.begin(), v.end());
            w[static_cast<std::size_t>(k)] += h;
            const double up = f_eps(std::span<const double>(w), eps);
            w[static_cast<std::size_t>(k)] -= 2.0 * h;
            fd_double[k] = (up - f_eps(std::span<const double>(w), eps)) / (2.0 * h);
          }
          const double scale = g.cwiseAbs().maxCoeff();
          worst = std::max(worst, (fd - g).cwiseAbs().maxCoeff() / scale);
          worst_double = std::max(worst_double, (fd_double - g).cwiseAbs().maxCoeff() / scale);
        }
      }
    }
    rep.constants["gradient.double_oracle_error"] = worst_double;
    c.value = worst;
    c.passed = worst <= c.limit;
    c.detail = fmt("max relative error %.3e over 6000 samples (n 2,4,6; eps 0,1e-3; double-precision oracle %.1e)",
                   worst, worst_double);
  });
}

Check concavity_suite(std::uint64_t seed, SuiteReport& rep) {
  return guarded(4, "concavity suite", 1e-10, [&](Check& c) {
    const int n = 4;
    const double eps = 1e-3;
    int violations = 0;
    double worst_gap = 0.0;
    double max_eig = -std::numeric_limits<double>::infinity();
    std::uint64_t stream = 0;
    for (double theta0 : {0.3, kTheta0Ref, 1.4}) {
      const double Theta = theta0 + kPi / 2;
      ConeSampler sampler(n, ConeSpec(Theta - 0.2, Theta), seed ^ (0xc0ffee + stream++));
      for (int s = 0; s < 10000; ++s) {
        const PhaseVector a = sampler.next();
        const PhaseVector b = sampler.next();
        std::vector<double> m(n);
        for (int k = 0; k < n; ++k) m[static_cast<std::size_t>(k)] = 0.5 * (a[k] + b[k]);
        const double gap = f_eps(PhaseVector(m), eps) - 0.5 * (f_eps(a, eps) + f_eps(b, eps));
        worst_gap = std::min(worst_gap, gap);
        if (gap < -1e-10) ++violations;
        for (const PhaseVector* v : {&a, &b}) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess_f_eps(*v, eps), Eigen::EigenvaluesOnly);
          max_eig = std::max(max_eig, es.eigenvalues().maxCoeff());
        }
      }
    }
    rep.constants["concavity.min_midpoint_gap"] = worst_gap;
    rep.constants["concavity.max_hessian_eigenvalue"] = max_eig;
    c.value = max_eig;
    c.passed = violations == 0 && max_eig <= c.limit;
    c.detail = fmt("%d violations in 30000 midpoints (worst gap %.3e), max Hessian eigenvalue %.3e",
                   violations, worst_gap, max_eig);
  });
}

Check perturbation_check(std::uint64_t seed, SuiteReport& rep) {
  return guarded(0, "metric perturbation lemmas", 0.0, [&](Check& c) {
    PerturbationConfig cfg;
    cfg.seed = seed;
    const PerturbationReport r = check_perturbation_lemmas(cfg);
    rep.constants["perturbation.empirical_c0"] = r.empirical_c0;
    rep.constants["perturbation.max_q_increase"] = r.max_q_increase;
    rep.constants["perturbation.max_f_decrease"] = r.max_f_decrease;
    c.value = r.total_violations();
    c.passed = r.total_violations() == 0 && r.q_continuity_checked > 0 && r.f_continuity_checked > 0;
    c.detail = fmt("%d violations; checked Q %d, P %d, F %d, Q-F-P %d", r.total_violations(),
                   r.q_continuity_checked, r.p_continuity_checked, r.f_continuity_checked,
                   r.qfp_checked);
  });
}

void eigenops_suite(SuiteReport& rep) {
  rep.checks.push_back(gradient_check(rep.seed, rep));
  rep.checks.push_back(concavity_suite(rep.seed, rep));
  rep.checks.push_back(perturbation_check(rep.seed, rep));
  for (int n : {2, 3}) {
    const ConcavitySearch s = search_concavity_counterexample(n, 1e-3, ConeSpec(1.2, 2.4), 2000, rep.seed);
    rep.constants[fmt("diagnostic.n%d_max_hessian_eigenvalue", n)] = s.max_hessian_eigenvalue;
  }
}

// ------------------------------------------------------------- functionals

std::vector<Potential> random_bumps(const TorusGrid& g, std::mt19937_64& rng, int count, double amp) {
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Potential> out;
  for (int i = 0; i < count; ++i) {
    PeriodicBump b;
    b.amplitude = amp * sym(rng);
    for (int a = 0; a < g.axes(); ++a) b.center[static_cast<std::size_t>(a)] = g.L() * unit(rng);
    b.width = 0.7 + 0.5 * unit(rng);
    out.push_back(bump_potential(g, std::span(&b, 1)));
  }
  return out;
}

void functionals_suite(SuiteReport& rep) {
  const CalibrationData cal = diag_class(2, 8, 2.0);
  std::mt19937_64 rng(rep.seed);
  const std::vector<Potential> bumps = random_bumps(cal.grid(), rng, 20, 0.3);

  rep.checks.push_back(guarded(12, "functional identity", 1e-8, [&](Check& c) {
    double worst = 0.0;
    for (const Potential& phi : bumps) {
      const double jj = j(cal, phi);
      worst = std::max(worst, std::abs(jj - std::sin(cal.theta0) * j0(cal, phi)) / (1.0 + std::abs(jj)));
    }
    c.value = worst;
    c.passed = worst <= c.limit;
    c.detail = fmt("max |J - sin(theta0) J0| / (1 + |J|) = %.3e over 20 bumps", worst);
  }));

  rep.checks.push_back(guarded(0, "J_eps split evaluation", 1e-8, [&](Check& c) {
    double worst = 0.0;
    for (const Potential& phi : bumps) {
      const double a = j_eps(cal, phi, 0.05);
      worst = std::max(worst, std::abs(a - j_eps_split(cal, phi, 0.05)) / (1.0 + std::abs(a)));
    }
    c.value = worst;
    c.passed = worst <= c.limit;
    c.detail = fmt("max relative gap %.3e between direct and split J_eps", worst);
  }));

  rep.checks.push_back(guarded(0, "J_eps constant invariance", 1e-10, [&](Check& c) {
    double worst = 0.0;
    for (const Potential& phi : bumps)
      worst = std::max(worst, std::abs(j_eps(cal, phi, 1e-3) - j_eps(cal, phi.plus_constant(0.37), 1e-3)));
    c.value = worst;
    c.passed = worst <= c.limit;
    c.detail = fmt("max |J_eps(phi + c) - J_eps(phi)| = %.3e", worst);
  }));

  rep.checks.push_back(guarded(0, "s Im control", 0.0, [&](Check& c) {
    double worst = std::numeric_limits<double>::infinity();
    std::vector<CoercivenessTerms> terms;
    for (const Potential& phi : bumps) {
      worst = std::min(worst, s_im_control_ratio(cal, phi, 0.5));
      terms.push_back(coerciveness_terms(cal, phi));
    }
    rep.constants["functionals.min_s_im_ratio"] = worst;
    rep.constants["functionals.coerciveness_C"] = calibrate_coerciveness_constant(terms, cal.a0);
    c.value = worst;
    c.passed = worst > c.limit;
    c.detail = fmt("min Im(alpha_{phi/2} + i omega)^n / Im(alpha_phi + i omega)^n = %.4f", worst);
  }));
}

// -------------------------------------------------------------------- flow

struct FRange {
  double over = 0.0;
  void add(const FlowTrace& tr) {
    const FlowSample& s0 = tr.samples.front();
    over = std::max({over, s0.min_f - tr.running_min_f, tr.running_max_f - s0.max_f});
  }
};

void flow_suite(SuiteReport& rep) {
  FRange range;
  bool ranges_ok = true;

  rep.checks.push_back(guarded(1, "heat oracle", 1e-4, [&](Check& c) {
    const CalibrationData cal = diag_class(1, 128, 2.0, Stencil::compact);
    const std::array<TrigTerm, 3> terms{TrigTerm{0.3, {1, 0}, 0.0}, TrigTerm{0.2, {0, 1}, 0.7},
                                        TrigTerm{0.1, {1, 1}, -0.4}};
    FlowConfig cfg;
    cfg.eps = 1e-3;
    cfg.cfl = 0.5;
    cfg.t_end = 0.5;
    cfg.tol = 0.0;
    cfg.monitor_functionals = false;
    cfg.monitor_every = 1 << 30;
    const auto t0 = Clock::now();
    const FlowTrace tr = run(cal, trig_potential(cal.grid(), terms), cfg);
    const double secs = since(t0);
    range.add(tr);
    // exact: each mode decays by exp(-|k|^2 t / 4) (L = 2 pi)
    std::array<TrigTerm, 3> exact = terms;
    for (TrigTerm& t : exact) {
      const double k2 = t.wave[0] * t.wave[0] + t.wave[1] * t.wave[1];
      t.amplitude *= std::exp(-0.25 * k2 * cfg.t_end);
    }
    const Potential ref = trig_potential(cal.grid(), exact);
    const double err = (tr.final_phi->values() - ref.values()).cwiseAbs().maxCoeff() / ref.sup_abs();
    c.value = err;
    c.passed = err <= c.limit && secs < 10.0;
    c.detail = fmt("relative Linf error %.3e at t = 0.5 (N = 128, %ld steps), runtime %s 10 s",
                   err, tr.steps, secs < 10.0 ? "under" : "over");
  }));

  rep.checks.push_back(guarded(2, "fixed point", 1e-12, [&](Check& c) {
    const CalibrationData cal = diag_class(2, 8, 3.0);
    double worst = 0.0;
    long steps = 0;
    for (double eps : {1e-1, 1e-2}) {
      FlowConfig cfg;
      cfg.eps = eps;
      cfg.t_end = 1.0;
      cfg.tol = 0.0;
      cfg.monitor_functionals = false;
      const FlowTrace tr = run(cal, Potential(cal.grid()), cfg);
      range.add(tr);
      steps += tr.steps;
      for (const FlowSample& s : tr.samples) worst = std::max(worst, s.sup_phi);
      if (tr.samples.back().t < 1.0) worst = std::numeric_limits<double>::infinity();
    }
    c.value = worst;
    c.passed = worst <= c.limit;
    c.detail = fmt("max sup|phi| = %.3e over t in [0, 1], eps 1e-1 and 1e-2 (%ld steps)", worst, steps);
  }));

  // Criteria 5 and 6 share one converged n = 2 run.
  std::optional<FlowTrace> bump;
  CalibrationData bump_cal = diag_class(2, 8, 2.0);
  const auto t_bump = Clock::now();
  std::string bump_error;
  try {
    PeriodicBump b{0.2, {kPi, kPi, kPi, kPi}, 0.8};
    FlowConfig cfg;
    cfg.eps = 1e-3;
    cfg.t_end = 200.0;
    cfg.tol = 1e-8;
    bump = run(bump_cal, bump_potential(bump_cal.grid(), std::span(&b, 1)), cfg);
    range.add(*bump);
  } catch (const Error& e) {
    bump_error = std::string("error: ") + e.what();
    ranges_ok = false;
  }
  const double bump_secs = since(t_bump);

  rep.checks.push_back(guarded(5, "Im Z conservation", 1e-6, [&](Check& c) {
    c.seconds = bump_secs;
    if (!bump) {
      c.detail = bump_error;
      return;
    }
    const double z0 = bump->samples.front().im_z;
    double drift = 0.0;
    for (const FlowSample& s : bump->samples) drift = std::max(drift, std::abs(s.im_z - z0));
    c.value = drift / (1.0 + std::abs(z0));
    c.passed = bump->converged && c.value <= c.limit;
    c.detail = fmt("max |Im Z(t) - Im Z(0)| = %.3e, Im Z(0) = %.4f, converged %s at t = %.2f (%ld steps)",
                   drift, z0, bump->converged ? "yes" : "no", bump->samples.back().t, bump->steps);
  }));
  rep.checks.back().seconds = bump_secs;

  rep.checks.push_back(guarded(6, "dissipation identity", 0.05, [&](Check& c) {
    if (!bump) {
      c.detail = bump_error;
      return;
    }
    bool monotone = true;
    for (std::size_t i = 1; i < bump->samples.size(); ++i)
      monotone = monotone && bump->samples[i].j_eps <= bump->samples[i - 1].j_eps;
    c.value = bump->max_dissipation_mismatch();
    c.passed = monotone && c.value <= c.limit;
    c.detail = fmt("max |dJ/dt + int phidot^2 Im| / |int phidot^2 Im| = %.3e over %zu steps, J non-increasing %s",
                   c.value, bump->samples.size() - 1, monotone ? "yes" : "no");
  }));

  rep.checks.push_back(guarded(7, "maximum principle", 1e-8, [&](Check& c) {
    c.value = range.over;
    c.passed = ranges_ok && range.over <= c.limit;
    c.detail = fmt("max excursion of running F range beyond initial range %.3e (heat, fixed point, bump runs)",
                   range.over);
  }));

  if (bump) {
    rep.checks.push_back(guarded(0, "exponential decay", 0.0, [&](Check& c) {
      c.value = bump->decay_slope();
      c.passed = c.value < c.limit;
      rep.constants["flow.decay_slope"] = c.value;
      c.detail = fmt("slope of log osc(phidot) over the second half %.4f", c.value);
    }));
    rep.checks.push_back(guarded(0, "phase confinement", 0.0, [&](Check& c) {
      const double floor = -std::tan(bump_cal.theta0);
      c.value = bump->running_min_lambda - floor;
      c.passed = c.value > c.limit && bump->running_min_q > 0.0 && bump->running_max_q < bump_cal.Theta0;
      rep.constants["flow.min_q"] = bump->running_min_q;
      rep.constants["flow.max_q"] = bump->running_max_q;
      c.detail = fmt("Q in [%.4f, %.4f] within (0, %.4f); min lambda - (-tan theta0) = %.4f",
                     bump->running_min_q, bump->running_max_q, bump_cal.Theta0, c.value);
    }));
    rep.checks.push_back(guarded(0, "stationary normalization", 1e-8, [&](Check& c) {
      const double w = std::abs(bump->samples.back().weighted_phidot);
      const double scale = integrate(evaluate_forms(bump_cal, *bump->final_phi).volume.im, bump_cal.grid());
      c.value = w / scale;
      c.passed = c.value <= c.limit;
      c.detail = fmt("|int phidot Im| / int Im = %.3e at convergence", c.value);
    }));
  }
}

// ---------------------------------------------------------------- geodesic

void geodesic_suite(SuiteReport& rep) {
  rep.checks.push_back(guarded(8, "exact geodesic", 0.01, [&](Check& c) {
    const CalibrationData cal = diag_class(1, 16, 2.0);
    const Potential zero(cal.grid());
    const Potential top = zero.plus_constant(0.3);
    GeodesicConfig cfg;
    cfg.slices = 32;
    double worst = 0.0, spread = 0.0;
    for (double p : {1.0, 2.0}) {
      const double exact = 0.3 * std::pow(cal.grid().volume() * std::sqrt(5.0), 1.0 / p);
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (double eps : kDefaultEpsSchedule) {
        cfg.eps = eps;
        const double len = length_p(cal, solve_eps_geodesic(cal, zero, top, cfg).path, p);
        worst = std::max(worst, std::abs(len - exact) / exact);
        lo = std::min(lo, len);
        hi = std::max(hi, len);
      }
      spread = std::max(spread, (hi - lo) / exact);
    }
    c.value = worst;
    c.passed = worst <= c.limit && spread <= 1e-3;
    c.detail = fmt("max relative length error %.3e, per-eps spread %.3e (p 1,2; eps 0.2,0.1,0.05)", worst, spread);
  }));

  rep.checks.push_back(guarded(9, "geodesic estimates", 0.0, [&](Check& c) {
    const CalibrationData cal = diag_class(1, 16, 2.0);
    const std::array<TrigTerm, 2> a{TrigTerm{0.15, {1, 0}, 0.0}, TrigTerm{0.1, {0, 1}, 0.0}};
    const std::array<TrigTerm, 2> b{TrigTerm{0.12, {1, 1}, 0.0}, TrigTerm{-0.1, {1, 0}, 0.0}};
    const Potential phi0 = trig_potential(cal.grid(), a);
    const Potential phi1 = trig_potential(cal.grid(), b);
    std::vector<double> dip, spread;
    double eqn = 0.0;
    bool converged = true;
    for (double eps : kDefaultEpsSchedule) {
      GeodesicConfig cfg;
      cfg.eps = eps;
      cfg.slices = 32;
      const GeodesicSolution s = solve_eps_geodesic(cal, phi0, phi1, cfg);
      converged = converged && s.report.converged;
      eqn = std::max(eqn, s.report.eqn_residual);
      dip.push_back(-s.report.min_phi_tt);
      spread.push_back(energy_profile(cal, s.path, 2.0).spread_delta());
      rep.constants[fmt("geodesic.C_phi_tt.eps=%g", eps)] = dip.back() / (eps * eps);
      rep.constants[fmt("geodesic.C_spread.eps=%g", eps)] = spread.back() / (eps * eps);
    }
    rep.constants["geodesic.max_eqn_residual"] = eqn;
    bool ok = converged && dip.back() > 0.0 && spread.back() > 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i + 1 < dip.size(); ++i) {
      for (double r : {dip[i] / dip[i + 1], spread[i] / spread[i + 1]}) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        ok = ok && r >= 2.0 && r <= 8.0;
      }
    }
    c.value = lo;
    c.limit = 2.0;
    c.passed = ok;
    c.detail = fmt("halving ratios in [%.2f, %.2f] (need [2, 8]); -min phi_tt %.3e %.3e %.3e, E_2 spread %.3e %.3e %.3e",
                   lo, hi, dip[0], dip[1], dip[2], spread[0], spread[1], spread[2]);
  }));

  rep.checks.push_back(guarded(10, "d_p lower bound", 0.99, [&](Check& c) {
    const CalibrationData cal = diag_class(1, 8, 2.0);
    const TorusGrid& g = cal.grid();
    std::mt19937_64 rng(rep.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto pair_bumps = [&]() {
      std::vector<PeriodicBump> bs;
      for (int i = 0; i < 2; ++i) {
        PeriodicBump b;
        b.amplitude = (unit(rng) - 0.5) * 0.8;
        b.center = {unit(rng) * g.L(), unit(rng) * g.L()};
        b.width = 0.8 + 0.6 * unit(rng);
        bs.push_back(b);
      }
      return bump_potential(g, bs);
    };
    GeodesicConfig cfg;
    cfg.slices = 16;
    double worst = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10; ++i) {
      const Potential a = pair_bumps();
      const Potential b = pair_bumps();
      for (double p : {1.0, 2.0}) {
        const DpEstimate d = estimate_dp(cal, a, b, p, kDefaultEpsSchedule, cfg);
        worst = std::min(worst, std::pow(d.extrapolated, p) / dp_lower_bound(cal, a, b, p).value());
      }
    }
    rep.constants["geodesic.min_dp_lower_bound_ratio"] = worst;
    c.value = worst;
    c.passed = worst >= c.limit;
    c.detail = fmt("min d_p^p / endpoint bound = %.4f over 10 pairs, p 1,2", worst);
  }));

  rep.checks.push_back(guarded(0, "length symmetry", 1e-6, [&](Check& c) {
    const CalibrationData cal = diag_class(1, 8, 2.0);
    PeriodicBump bump{0.25, {2.0, 3.0}, 1.0};
    const Potential a = bump_potential(cal.grid(), std::span(&bump, 1));
    const TrigTerm t{0.1, {0, 1}, 0.3};
    const Potential b = trig_potential(cal.grid(), std::span(&t, 1));
    GeodesicConfig cfg;
    cfg.eps = 0.1;
    cfg.slices = 16;
    const GeodesicSolution f = solve_eps_geodesic(cal, a, b, cfg);
    const GeodesicSolution r = solve_eps_geodesic(cal, b, a, cfg);
    double worst = 0.0;
    for (double p : {1.0, 2.0}) {
      const double lf = length_p(cal, f.path, p);
      worst = std::max(worst, std::abs(lf - length_p(cal, r.path, p)) / lf);
    }
    c.value = worst;
    c.passed = worst <= c.limit;
    c.detail = fmt("relative gap between length(a -> b) and length(b -> a) %.3e", worst);
  }));
}

// -------------------------------------------------------------- regularize

void regularize_suite(SuiteReport& rep) {
  rep.checks.push_back(guarded(11, "regularized max and mollification", 1e-14, [&](Check& c) {
    std::mt19937_64 rng(rep.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double excess = 0.0;
    int locality_failures = 0;
    for (int s = 0; s < 10000; ++s) {
      const std::size_t m = 1 + static_cast<std::size_t>(s % 6);
      const double eta = 0.05 + 0.2 * (u(rng) + 1.0);
      std::vector<double> v(m);
      for (double& x : v) x = u(rng);
      const double top = *std::max_element(v.begin(), v.end());
      const double r = regularized_max(v, eta);
      excess = std::max({excess, top - r, r - top - eta});
      std::vector<double> w = v;
      w.push_back(top - 2.0 * eta - 0.5 * (u(rng) + 1.0) * eta);
      if (regularized_max(w, eta) != r) ++locality_failures;
    }
    double psh = std::numeric_limits<double>::infinity();
    {
      const CalibrationData cal = diag_class(1, 32, 2.0);
      PeriodicBump b{0.3, {1.0, 2.0}, 0.8};
      psh = std::min(psh, phase_after_mollify_check(cal, bump_potential(cal.grid(), std::span(&b, 1)),
                                                    MollifierSpec(3.0)).psh_slack);
    }
    {
      const CalibrationData cal = diag_class(2, 8, 2.0);
      std::mt19937_64 r2(rep.seed + 1);
      const Potential phi = random_bumps(cal.grid(), r2, 1, 0.3).front();
      psh = std::min(psh, phase_after_mollify_check(cal, phi, MollifierSpec(2.0)).psh_slack);
    }
    rep.constants["regularize.psh_slack"] = psh;
    c.value = excess;
    c.passed = excess <= c.limit && locality_failures == 0 && psh >= -1e-10;
    c.detail = fmt("sandwich excess %.3e, locality failures %d / 10000, mollified psh slack %.3e",
                   excess, locality_failures, psh);
  }));

  rep.checks.push_back(guarded(0, "regularized max convexity", -1e-12, [&](Check& c) {
    std::mt19937_64 rng(rep.seed ^ 0x5eed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    for (int s = 0; s < 10000; ++s) {
      const std::size_t m = 1 + static_cast<std::size_t>(s % 5);
      const double eta = 0.05 + 0.2 * (u(rng) + 1.0);
      std::vector<double> a(m), b(m), mid(m);
      for (std::size_t i = 0; i < m; ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
        mid[i] = 0.5 * (a[i] + b[i]);
      }
      worst = std::min(worst, 0.5 * (regularized_max(a, eta) + regularized_max(b, eta)) - regularized_max(mid, eta));
    }
    c.value = worst;
    c.passed = worst >= c.limit;
    c.detail = fmt("min midpoint convexity gap %.3e over 10000 pairs", worst);
  }));

  rep.checks.push_back(guarded(0, "mollified phase bound", 1e-12, [&](Check& c) {
    const CalibrationData cal = diag_class(1, 32, 2.0);
    PeriodicBump b{0.3, {1.0, 2.0}, 0.8};
    const MollifyReport r = phase_after_mollify_check(cal, bump_potential(cal.grid(), std::span(&b, 1)),
                                                      MollifierSpec(3.0));
    rep.constants["regularize.phase_slack"] = r.phase_slack;
    c.value = r.phase_slack;
    c.passed = r.phase_slack <= c.limit && r.hessian_commutation <= 1e-10;
    c.detail = fmt("Q(mollified) - max over ball %.3e, Hessian commutation %.3e", r.phase_slack,
                   r.hessian_commutation);
  }));

  rep.checks.push_back(guarded(0, "gluing keeps the cone", 1e-10, [&](Check& c) {
    const CalibrationData cal = diag_class(1, 32, 2.0);
    PeriodicBump b{0.3, {1.0, 2.0}, 0.8};
    const Potential u = bump_potential(cal.grid(), std::span(&b, 1));
    const double L = cal.grid().L();
    const GlueResult r = glue(cal, make_box_patches(u, 4, 3.0 * L / 16.0, 0.05), 0.01);
    c.value = r.min_patch_margin - r.glued_margin;
    c.passed = c.value <= c.limit;
    c.detail = fmt("glued margin %.4f vs min patch margin %.4f, max cover %d", r.glued_margin,
                   r.min_patch_margin, r.max_cover);
  }));
}

}  // namespace

bool SuiteReport::passed() const { return violations() == 0; }

int SuiteReport::violations() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.passed; }));
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"eigenops", "functionals", "flow", "geodesic", "regularize"};
  return names;
}

SuiteReport run_suite(const std::string& name, std::uint64_t seed) {
  SuiteReport rep;
  rep.suite = name;
  rep.seed = seed;
  if (name == "eigenops") {
    eigenops_suite(rep);
  } else if (name == "functionals") {
    functionals_suite(rep);
  } else if (name == "flow") {
    flow_suite(rep);
  } else if (name == "geodesic") {
    geodesic_suite(rep);
  } else if (name == "regularize") {
    regularize_suite(rep);
  } else {
    throw InvalidInput("unknown suite '" + name + "'");
  }
  return rep;
}

}  // namespace dhym
