#include <cmath>
#include <random>

#include "doctest.h"
#include "dhym/error.hpp"
#include "dhym/functionals.hpp"
#include "test_support.hpp"

using namespace dhym;
using dhym::testing::kPi;
using dhym::testing::random_bump;

namespace {

CalibrationData diag_class(int n, int N, double lambda) {
  const TorusGrid g(n, N);
  return compute_theta0(constant_field(g, CMatrix::Identity(n, n) * lambda));
}

// alpha = 2 I + i ddbar f, f a two-mode trig potential
CalibrationData trig_class(int N) {
  const TorusGrid g(2, N);
  const std::array<TrigTerm, 2> f{TrigTerm{0.3, {1, 0, 0, 0}, 0.0}, TrigTerm{0.2, {0, 1, 1, 0}, 0.4}};
  return compute_theta0(alpha_phi(constant_field(g, CMatrix::Identity(2, 2) * 2.0), trig_potential(g, f)));
}

}  // namespace

TEST_CASE("theta0 examples") {
  const CalibrationData c = diag_class(2, 8, 3.0);
  CHECK(c.theta0 == doctest::Approx(2.0 * std::atan(1.0 / 3.0)).epsilon(1e-13));
  CHECK(c.theta0 == doctest::Approx(0.6435).epsilon(1e-4));
  CHECK(c.a0 == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(c.theta0_hat == doctest::Approx(kPi - c.theta0));
  CHECK(c.Theta0 == doctest::Approx(c.theta0 + kPi / 2));
  CHECK(c.cot_theta0 == doctest::Approx(4.0 / 3.0));
  CHECK(c.chi.at(5)(0, 0).real() == doctest::Approx(3.0 + 0.75));
  CHECK(std::abs(c.chi.at(5)(0, 1)) == 0.0);

  CHECK_THROWS_AS(diag_class(2, 8, 1.0), NotHypercritical);
  try {
    diag_class(2, 8, 0.2);
    FAIL("expected NotHypercritical");
  } catch (const NotHypercritical& e) {
    CHECK(e.theta0() == doctest::Approx(std::atan2(0.4, 0.04 - 1.0)));
  }

  // (2+i)^2 = 3+4i on even points, (l+i)(m+i) = -3-4i on odd points
  const TorusGrid g(2, 8);
  HermitianField alpha = constant_field(g, CMatrix::Identity(2, 2) * 2.0);
  for (std::size_t p = 1; p < g.size(); p += 2) {
    alpha.at(p)(0, 0) = -2.0 + std::sqrt(6.0);
    alpha.at(p)(1, 1) = -2.0 - std::sqrt(6.0);
  }
  CHECK_THROWS_AS(compute_theta0(alpha), DegenerateClass);
}

TEST_CASE("trig class has the constant part's phase") {
  const CalibrationData c = trig_class(8);
  CHECK(c.theta0 == doctest::Approx(2.0 * std::atan(0.5)).epsilon(1e-12));
  CHECK(c.a0 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("membership examples and nesting") {
  const CalibrationData c = diag_class(2, 8, 3.0);
  const Potential zero(c.grid());
  CHECK(membership(c, zero, 0.5).inside);
  CHECK(membership(c, zero, 0.5).margin == doctest::Approx(c.theta0 - 0.5));
  CHECK_FALSE(membership(c, zero, 0.65).inside);
  CHECK(membership(c, zero, 0.0).margin == doctest::Approx(c.theta0));

  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Potential phi = random_bump(c.grid(), rng, 1.0);
    const PointwiseForms f = evaluate_forms(c, phi);
    for (double c2 : {0.1, 0.3, 0.5, 0.6}) {
      if (!membership(c, f, c2).inside) continue;
      for (double c1 : {0.0, 0.05, c2}) CHECK(membership(c, f, c1).inside);
      CHECK(hc_positivity_slack(c, f, c2) >= 0.0);
      // pointwise Im >= floor * prod sqrt(1 + l^2)
      const double floor = std::min(std::sin(c2), std::cos(c.theta0));
      for (Eigen::Index p = 0; p < f.eigenvalues.cols(); ++p) {
        const double mod = (1.0 + f.eigenvalues.col(p).array().square()).sqrt().prod();
        CHECK(f.volume.im[p] >= floor * mod * (1.0 - 1e-12));
      }
    }
  }
}

TEST_CASE("functionals vanish at the base point and on constants") {
  for (const CalibrationData& c : {diag_class(2, 8, 3.0), trig_class(8)}) {
    const Potential zero(c.grid());
    const Potential k = zero.plus_constant(0.7);
    CHECK(j_eps(c, zero, 1e-3) == 0.0);
    CHECK(j(c, zero) == 0.0);
    CHECK(im_z(c, zero) == 0.0);
    CHECK(std::abs(j_eps(c, k, 1e-3)) <= 1e-10);
    CHECK(std::abs(j0(c, k)) <= 1e-10);
    CHECK(std::abs(j(c, k)) <= 1e-10);
    const double im_total = integrate(evaluate_forms(c.alpha).volume.im, c.grid());
    CHECK(im_z(c, k) == doctest::Approx(-0.7 * im_total).epsilon(1e-12));
    CHECK(coercivity_gap(c, zero, 0.3, 2.5) == doctest::Approx(2.5));
    CHECK(coercivity_gap(c, k, 0.3, 2.5) == doctest::Approx(2.5).epsilon(1e-10));
    CHECK(s_im_control_ratio(c, k, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quadrature refinement and the functional identities on bumps") {
  const CalibrationData c = trig_class(8);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const Potential phi = random_bump(c.grid(), rng, 0.3);
    const double a = j_eps(c, phi, 1e-3, 8);
    const double b = j_eps(c, phi, 1e-3, 16);
    CHECK(std::abs(a - b) <= 1e-8 * (1.0 + std::abs(b)));
    // degree-n integrand: two nodes are already exact
    CHECK(std::abs(j_eps(c, phi, 1e-3, 2) - b) <= 1e-8 * (1.0 + std::abs(b)));

    const double jj = j(c, phi);
    CHECK(std::abs(jj - std::sin(c.theta0) * j0(c, phi)) <= 1e-8 * (1.0 + std::abs(jj)));
    CHECK(std::abs(j_eps(c, phi, 0.05) - j_eps_split(c, phi, 0.05)) <= 1e-8 * (1.0 + std::abs(b)));
    CHECK(std::abs(j_eps(c, phi, 1e-3) - j_eps(c, phi.plus_constant(-0.4), 1e-3)) <= 1e-10);

    const EnergyPair pair = j_eps_and_im_z(c, phi, 1e-3);
    CHECK(pair.j_eps == doctest::Approx(j_eps(c, phi, 1e-3)).epsilon(1e-13));
    CHECK(pair.im_z == doctest::Approx(im_z(c, phi)).epsilon(1e-13));

    CHECK(s_im_control_ratio(c, phi, 1.0) == 1.0);
    CHECK(s_im_control_ratio(c, phi, 0.5) > 0.0);
  }
  const Potential zero(c.grid());
  CHECK_THROWS_AS(s_im_control_ratio(c, zero, 0.4), InvalidInput);
  CHECK_THROWS_AS(j_eps(c, zero, 0.0, 0), InvalidInput);
  CHECK_THROWS_AS(j(c, Potential(TorusGrid(2, 10))), InvalidInput);
}

namespace {

// |central difference of J_eps along psi - (-int psi (F - cot theta0 - a0 eps) Im)|, relative
double first_variation_mismatch(int n, int N) {
  const TorusGrid g(n, N);
  std::vector<TrigTerm> f{TrigTerm{0.3, {1, 0}, 0.0}, TrigTerm{0.2, {1, 1}, 0.4}};
  if (n == 2) f = {TrigTerm{0.3, {1, 0, 0, 0}, 0.0}, TrigTerm{0.2, {0, 1, 1, 0}, 0.4}};
  const CalibrationData c =
      compute_theta0(alpha_phi(constant_field(g, CMatrix::Identity(n, n) * 2.0), trig_potential(g, f)));
  std::mt19937_64 rng(17);
  const Potential phi = random_bump(g, rng, 0.3);
  const Potential psi = random_bump(g, rng, 0.3);
  const double eps = 1e-2;
  const double h = 1e-4;
  const double fd =
      (j_eps(c, phi + psi * h, eps, 2) - j_eps(c, phi + psi * (-h), eps, 2)) / (2.0 * h);
  const PointwiseForms fm = evaluate_forms(c, phi);
  const Eigen::VectorXd dens =
      (fm.volume.re.array() + eps - (c.cot_theta0 + c.a0 * eps) * fm.volume.im.array()).matrix();
  const double exact = -integrate(psi.values().cwiseProduct(dens), g);
  return std::abs(fd - exact) / std::abs(exact);
}

}  // namespace

TEST_CASE("first variation of J_eps") {
  // n = 1: the density is affine in the Laplacian, so the discrete 1-form is closed.
  CHECK(first_variation_mismatch(1, 16) <= 1e-9);
  // n >= 2: closed only up to the stencil's O(h^2) product-rule defect.
  const double coarse = first_variation_mismatch(2, 8);
  const double fine = first_variation_mismatch(2, 16);
  MESSAGE("n = 2 mismatch " << coarse << " -> " << fine);
  CHECK(fine <= 5e-4);
  CHECK(coarse / fine >= 2.5);
}

TEST_CASE("path exit names the node") {
  const CalibrationData c = diag_class(1, 16, 2.0);
  PeriodicBump b;
  b.amplitude = 8.0;
  b.width = 0.4;
  b.center = {kPi, kPi};
  const Potential phi = bump_potential(c.grid(), std::span(&b, 1));
  try {
    j_eps(c, phi, 1e-3);
    FAIL("expected PathExit");
  } catch (const PathExit& e) {
    CHECK(e.t() > 0.0);
    CHECK(e.t() < 1.0);
  }
}

TEST_CASE("coerciveness constant covers every sample") {
  const CalibrationData c = trig_class(8);
  std::mt19937_64 rng(29);
  std::vector<CoercivenessTerms> samples;
  for (int trial = 0; trial < 6; ++trial)
    samples.push_back(coerciveness_terms(c, random_bump(c.grid(), rng, 0.1 + 0.1 * trial)));
  const double big_c = calibrate_coerciveness_constant(samples, c.a0);
  CHECK(big_c >= 0.0);
  for (const CoercivenessTerms& s : samples)
    CHECK(s.path >= c.a0 / big_c * s.endpoint - big_c - 1e-12);
  CHECK(calibrate_coerciveness_constant({}, c.a0) == 0.0);
}
