#include <cmath>

#include "doctest.h"
#include "dhym/error.hpp"
#include "dhym/geodesic.hpp"
#include "test_support.hpp"

using namespace dhym;
using dhym::testing::kPi;

namespace {

CalibrationData diag_class(int n, int N, double lambda) {
  const TorusGrid g(n, N);
  return compute_theta0(constant_field(g, CMatrix::Identity(n, n) * lambda));
}

Potential trig(const TorusGrid& g, std::initializer_list<TrigTerm> terms) {
  const std::vector<TrigTerm> v(terms);
  return trig_potential(g, v);
}

GeodesicConfig config(double eps, int slices) {
  GeodesicConfig c;
  c.eps = eps;
  c.slices = slices;
  return c;
}

// int |phi0 - phi1|^p Re(e^{-i theta0} (alpha_{phi0} + i omega)^n)
double upper_integral(const CalibrationData& cal, const Potential& phi0, const Potential& phi1,
                      double p) {
  const VolumeRatios w = evaluate_forms(cal, phi0).volume.rotated(cal.theta0);
  const Eigen::VectorXd d = (phi0.values() - phi1.values()).cwiseAbs().array().pow(p).matrix();
  return integrate(d.cwiseProduct(w.re), cal.grid());
}

}  // namespace

TEST_CASE("path construction") {
  const TorusGrid g(1, 8);
  const Potential a = trig(g, {TrigTerm{0.2, {1, 0}, 0.0}});
  const Potential b = trig(g, {TrigTerm{0.1, {0, 1}, 0.0}});
  PathPotential path(a, b, 4);
  CHECK(path.slices() == 4);
  CHECK(path.dt() == 0.25);
  CHECK(path.slice(0).values() == a.values());
  CHECK(path.slice(4).values() == b.values());
  CHECK(path.slice(1)[5] == doctest::Approx(0.75 * a[5] + 0.25 * b[5]));
  CHECK_THROWS_AS(path.interior(0), InvalidInput);
  CHECK_THROWS_AS(path.interior(4), InvalidInput);
  const Eigen::VectorXd v = path.interior_vector();
  CHECK(v.size() == 3 * 64);
  path.set_interior(v * 2.0);
  CHECK(path.slice(2)[7] == doctest::Approx(2.0 * (0.5 * a[7] + 0.5 * b[7])));
  CHECK_THROWS_AS(path.set_interior(Eigen::VectorXd::Zero(5)), InvalidInput);
  CHECK_THROWS_AS(PathPotential(a, b, 1), InvalidInput);
  CHECK_THROWS_AS(PathPotential(a, Potential(TorusGrid(1, 10)), 4), InvalidInput);
}

TEST_CASE("lifted matrix examples") {
  const CalibrationData c2 = diag_class(2, 8, 3.0);
  const Potential zero(c2.grid());
  const PathPotential flat(zero, zero, 4);
  const CMatrix m = lifted_matrix(c2, flat, 0.1, 2, 9);
  CHECK(m.rows() == 3);
  CHECK((m.topLeftCorner(2, 2) - CMatrix::Identity(2, 2) * 3.0).norm() <= 1e-14);
  CHECK(m.col(2).norm() == 0.0);
  CHECK(m.row(2).norm() == 0.0);

  const CalibrationData c1 = diag_class(1, 8, 2.0);
  const Potential z1(c1.grid());
  const PathPotential straight(z1, z1.plus_constant(0.3), 8);
  const CMatrix d = lifted_matrix(c1, straight, 0.05, 3, 0);
  CHECK(std::abs(d(0, 0) - Complex{2.0, 0.0}) <= 1e-14);
  CHECK(std::abs(d(0, 1)) <= 1e-12);
  CHECK(std::abs(d(1, 1)) <= 1e-9);

  // curvature in t enters the corner as e^{2t} phi_tt / (4 eps^2)
  PathPotential bent(z1, z1, 4);
  bent.interior(2) = z1.plus_constant(-0.01);
  const double phi_tt = 0.02 / (0.25 * 0.25);
  const CMatrix k = lifted_matrix(c1, bent, 0.1, 2, 0);
  CHECK(k(1, 1).real() == doctest::Approx(std::exp(1.0) * phi_tt / (4.0 * 0.01)).epsilon(1e-12));

  CHECK_THROWS_AS(lifted_matrix(c1, straight, 0.1, 0, 0), InvalidInput);
  CHECK_THROWS_AS(lifted_matrix(c1, straight, 0.0, 1, 0), InvalidInput);
  CHECK_THROWS_AS(lifted_matrix(c1, straight, 0.1, 1, 1000), InvalidInput);
}

TEST_CASE("constant paths are exact") {
  for (int n : {1, 2}) {
    const CalibrationData c = diag_class(n, 8, 3.0);
    const Potential zero(c.grid());
    const GeodesicSolution s = solve_eps_geodesic(c, zero, zero, config(0.1, 4));
    CHECK(s.report.converged);
    CHECK(s.report.iterations == 0);
    CHECK(s.report.residual <= 1e-12);
    CHECK(length_p(c, s.path, 2.0) == 0.0);
  }
}

TEST_CASE("straight path between constants has the closed-form length") {
  const CalibrationData c = diag_class(1, 8, 2.0);
  const Potential zero(c.grid());
  const Potential top = zero.plus_constant(0.3);
  const double weight = c.grid().volume() * std::sqrt(5.0);
  for (double eps : {0.2, 0.05}) {
    const GeodesicSolution s = solve_eps_geodesic(c, zero, top, config(eps, 8));
    CHECK(s.report.converged);
    CHECK(s.report.iterations == 0);
    for (double p : {1.0, 2.0}) {
      CHECK(length_p(c, s.path, p) == doctest::Approx(0.3 * std::pow(weight, 1.0 / p)).epsilon(1e-12));
      const EnergyProfile e = energy_profile(c, s.path, p);
      CHECK(e.t.size() == 8);
      CHECK(e.e_p[3] == doctest::Approx(std::pow(0.3, p) * weight).epsilon(1e-12));
    }
  }
  const DpEstimate d = estimate_dp(c, zero, top, 2.0, kDefaultEpsSchedule, config(0.1, 8));
  REQUIRE(d.lengths.size() == 3);
  CHECK(d.lengths[0] == d.lengths[1]);
  CHECK(d.lengths[1] == d.lengths[2]);
  CHECK(d.extrapolated == doctest::Approx(d.lengths[0]).epsilon(1e-12));
  CHECK(estimate_dp(c, top, top, 1.0).extrapolated == 0.0);
}

TEST_CASE("n = 1 trig endpoints converge with consistent residual forms") {
  const CalibrationData c = diag_class(1, 16, 2.0);
  const Potential a = trig(c.grid(), {TrigTerm{0.15, {1, 0}, 0.0}, TrigTerm{0.1, {0, 1}, 0.0}});
  const Potential b = trig(c.grid(), {TrigTerm{0.12, {1, 1}, 0.0}, TrigTerm{-0.1, {1, 0}, 0.0}});
  const double eps = 0.1;
  const GeodesicSolution s = solve_eps_geodesic(c, a, b, config(eps, 16));
  const GeodesicReport& r = s.report;
  CHECK(r.converged);
  CHECK(r.residual < 1e-10);
  CHECK(r.eqn_residual <= 1e-6);
  CHECK(r.identity_residual <= 1e-10);
  CHECK(r.path_margin > 0.0);
  CHECK(s.path.slice(0).values() == a.values());
  CHECK(s.path.slice(16).values() == b.values());
  const double big_c = -r.min_phi_tt / (eps * eps);
  MESSAGE("min phi_tt " << r.min_phi_tt << ", C = " << big_c << ", iterations " << r.iterations);
  CHECK(std::isfinite(big_c));
  CHECK(r.max_phi_t <= (a - b).sup_abs() + 10.0 * eps * eps);

  const GeodesicReport again = inspect_path(c, s.path, eps);
  CHECK(again.residual == doctest::Approx(r.residual));

  // |E_p - E_{p,delta}| <= C delta with C calibrated at the larger delta
  for (double p : {1.0, 2.0}) {
    const EnergyProfile coarse = energy_profile(c, s.path, p, 1e-2);
    const EnergyProfile fine = energy_profile(c, s.path, p, 1e-3);
    double k = 0.0;
    for (std::size_t i = 0; i < coarse.t.size(); ++i)
      k = std::max(k, std::abs(coarse.e_p[i] - coarse.e_p_delta[i]) / 1e-2);
    for (std::size_t i = 0; i < fine.t.size(); ++i) {
      CHECK(fine.e_p[i] == coarse.e_p[i]);
      CHECK(std::abs(fine.e_p[i] - fine.e_p_delta[i]) <= k * 1e-3 * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("length is symmetric in the endpoints") {
  const CalibrationData c = diag_class(1, 8, 2.0);
  PeriodicBump bump{0.25, {2.0, 3.0}, 1.0};
  const Potential a = bump_potential(c.grid(), std::span(&bump, 1));
  const Potential b = trig(c.grid(), {TrigTerm{0.1, {0, 1}, 0.3}});
  const GeodesicSolution fwd = solve_eps_geodesic(c, a, b, config(0.1, 16));
  const GeodesicSolution bwd = solve_eps_geodesic(c, b, a, config(0.1, 16));
  for (double p : {1.0, 2.0}) {
    const double lf = length_p(c, fwd.path, p);
    const double lb = length_p(c, bwd.path, p);
    CHECK(std::abs(lf - lb) <= 1e-6 * lf);
  }
}

TEST_CASE("nested endpoints: monotone comparison and two-sided bounds") {
  const CalibrationData c = diag_class(1, 8, 2.0);
  PeriodicBump bump{0.25, {2.0, 3.0}, 1.0};
  const Potential top = bump_potential(c.grid(), std::span(&bump, 1));
  const Potential zero(c.grid());
  const Potential mid = top * 0.5;
  const GeodesicConfig cfg = config(0.1, 16);
  for (double p : {1.0, 2.0}) {
    const double d01 = std::pow(estimate_dp(c, zero, mid, p, kDefaultEpsSchedule, cfg).extrapolated, p);
    const double d02 = std::pow(estimate_dp(c, zero, top, p, kDefaultEpsSchedule, cfg).extrapolated, p);
    const DpLowerBound lb = dp_lower_bound(c, zero, top, p);
    CHECK(lb.from_phi0 == 0.0);
    CHECK(lb.value() == lb.from_phi1);
    CHECK(d01 <= d02);
    CHECK(d02 >= 0.99 * lb.value());
    CHECK(d02 <= 1.01 * upper_integral(c, zero, top, p));
  }
}

TEST_CASE("validation") {
  const CalibrationData c = diag_class(1, 8, 2.0);
  const Potential zero(c.grid());
  GeodesicConfig bad = config(0.0, 8);
  CHECK_THROWS_AS(solve_eps_geodesic(c, zero, zero, bad), InvalidInput);
  bad = config(0.1, 8);
  bad.tol = 0.0;
  CHECK_THROWS_AS(solve_eps_geodesic(c, zero, zero, bad), InvalidInput);
  CHECK_THROWS_AS(estimate_dp(c, zero, zero, 1.0, {}), InvalidInput);
  const PathPotential path(zero, zero, 4);
  CHECK_THROWS_AS(energy_profile(c, path, 0.5), InvalidInput);
  CHECK_THROWS_AS(energy_profile(c, path, 1.0, -1.0), InvalidInput);

  PeriodicBump deep{8.0, {kPi, kPi}, 0.4};
  const Potential out = bump_potential(c.grid(), std::span(&deep, 1));
  CHECK_THROWS_AS(solve_eps_geodesic(c, zero, out, config(0.1, 8)), PathExit);

  GeodesicConfig tight = config(0.05, 16);
  tight.max_iterations = 1;
  tight.tol = 1e-14;
  const Potential a = trig(c.grid(), {TrigTerm{0.15, {1, 0}, 0.0}});
  CHECK_THROWS_AS(solve_eps_geodesic(c, a, zero, tight), NonConvergence);
}
