#include <cmath>
#include <random>

#include "doctest.h"
#include "dhym/error.hpp"
#include "dhym/torus.hpp"
#include "test_support.hpp"

using namespace dhym;
using dhym::testing::kPi;

namespace {

TrigTerm term(double a, std::array<int, 6> k, double phase = 0.0) {
  TrigTerm t;
  t.amplitude = a;
  t.wave = k;
  t.phase = phase;
  return t;
}

// max over points of |H(i,j) - expected(i,j,x)|
template <class Fn>
double hessian_error(const HermitianField& h, Fn expected) {
  double err = 0.0;
  for (std::size_t p = 0; p < h.size(); ++p) {
    const auto m = h.at(p);
    for (int i = 0; i < h.n(); ++i) {
      for (int j = 0; j < h.n(); ++j) err = std::max(err, std::abs(m(i, j) - expected(i, j, p)));
    }
  }
  return err;
}

}  // namespace

TEST_CASE("grid validation and index arithmetic") {
  CHECK_THROWS_AS(TorusGrid(0, 8), InvalidInput);
  CHECK_THROWS_AS(TorusGrid(4, 8), InvalidInput);
  CHECK_THROWS_AS(TorusGrid(1, 6), InvalidInput);
  CHECK_THROWS_AS(TorusGrid(1, 9), InvalidInput);
  CHECK_THROWS_AS(TorusGrid(1, 8, -1.0), InvalidInput);
  CHECK_THROWS_AS(stencil_from_string("spectral"), InvalidInput);
  CHECK(stencil_from_string("compact") == Stencil::compact);
  CHECK(to_string(Stencil::conservative) == "conservative");

  const TorusGrid g(2, 8);
  CHECK(g.size() == 4096);
  CHECK(g.h() == doctest::Approx(2.0 * kPi / 8));
  CHECK(g.volume() == doctest::Approx(std::pow(2.0 * kPi, 4)));
  for (std::size_t idx : {std::size_t{0}, std::size_t{17}, std::size_t{4095}}) {
    CHECK(g.index(g.coords(idx)) == idx);
    std::array<int, 6> off{};
    off[0] = 8;
    off[3] = -16;
    CHECK(g.shift(idx, off) == idx);
    off[0] = 1;
    off[3] = 0;
    const std::size_t s = g.shift(idx, off);
    CHECK(g.coords(s)[0] == (g.coords(idx)[0] + 1) % 8);
  }
  CHECK(g.coordinate(1, 0) == doctest::Approx(g.h()));
  CHECK(g.coordinate(8, 1) == doctest::Approx(g.h()));
}

TEST_CASE("potential arithmetic") {
  const TorusGrid g(1, 8);
  Potential a(g, Eigen::VectorXd::LinSpaced(64, -1.0, 1.0));
  CHECK(a.mean() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(a.osc() == doctest::Approx(2.0));
  CHECK(a.sup_abs() == doctest::Approx(1.0));
  CHECK((a + a.plus_constant(1.0))[0] == doctest::Approx(-1.0));
  CHECK((a * 3.0)[63] == doctest::Approx(3.0));
  CHECK_THROWS_AS(Potential(g, Eigen::VectorXd::Zero(10)), InvalidInput);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(64);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(Potential(g, bad), InvalidInput);
  CHECK_THROWS_AS(a + Potential(TorusGrid(1, 10)), InvalidInput);
}

TEST_CASE("constant potential has zero Hessian") {
  for (Stencil s : {Stencil::conservative, Stencil::compact}) {
    const TorusGrid g(2, 8, 2.0 * kPi, s);
    Potential c(g, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.size()), 4.2));
    const HermitianField h = complex_hessian(c);
    CHECK(hessian_error(h, [](int, int, std::size_t) { return Complex{}; }) <= 1e-12);
  }
}

TEST_CASE("cos x has ddbar = -(pi/L)^2 cos x with second-order error") {
  for (Stencil s : {Stencil::conservative, Stencil::compact}) {
    for (double L : {2.0 * kPi, 3.0}) {
      double prev = 0.0;
      for (int N : {16, 32, 64}) {
        const TorusGrid g(1, N, L, s);
        const TrigTerm t = term(1.0, {1, 0});
        const Potential phi = trig_potential(g, std::span(&t, 1));
        const HermitianField h = complex_hessian(phi);
        const double err = hessian_error(h, [&](int, int, std::size_t p) {
          return Complex{-(kPi * kPi / (L * L)) * std::cos(2.0 * kPi * g.coordinate(p, 0) / L), 0.0};
        });
        if (prev > 0.0) CHECK(prev / err >= 3.5);
        prev = err;
      }
    }
  }
}

TEST_CASE("mixed Hessian entries of a two-variable mode") {
  // phi = cos(x1 + y2): d^2/dz1 dzbar2 = (i/4) d_{x1 y2} phi = -(i/4) cos(x1 + y2)
  for (Stencil s : {Stencil::conservative, Stencil::compact}) {
    double prev = 0.0;
    for (int N : {8, 16, 32}) {
      const TorusGrid g(2, N, 2.0 * kPi, s);
      const TrigTerm t = term(1.0, {1, 0, 0, 1});
      const Potential phi = trig_potential(g, std::span(&t, 1));
      const HermitianField h = complex_hessian(phi);
      CHECK(h.hermitian_residual() == 0.0);
      const double err = hessian_error(h, [&](int i, int j, std::size_t p) {
        const double c = std::cos(g.coordinate(p, 0) + g.coordinate(p, 3));
        if (i == j) return Complex{-0.25 * c, 0.0};
        return i == 0 ? Complex{0.0, -0.25 * c} : Complex{0.0, 0.25 * c};
      });
      if (prev > 0.0) CHECK(prev / err >= 3.5);
      prev = err;
    }
  }
}

TEST_CASE("diagonal Hessian entries integrate to zero") {
  std::mt19937_64 rng(11);
  for (Stencil s : {Stencil::conservative, Stencil::compact}) {
    const TorusGrid g(2, 12, 2.0 * kPi, s);
    for (int trial = 0; trial < 3; ++trial) {
      const Potential phi = dhym::testing::random_bump(g, rng, 0.5);
      const HermitianField h = complex_hessian(phi);
      CHECK(h.hermitian_residual() == 0.0);
      for (int i = 0; i < 2; ++i) {
        Eigen::VectorXd d(static_cast<Eigen::Index>(g.size()));
        for (std::size_t p = 0; p < g.size(); ++p) d[static_cast<Eigen::Index>(p)] = h.at(p)(i, i).real();
        CHECK(std::abs(integrate(d, g)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("alpha_phi") {
  const TorusGrid g(2, 8);
  const HermitianField alpha = constant_field(g, CMatrix::Identity(2, 2) * 3.0);
  const Potential zero(g);
  const HermitianField same = alpha_phi(alpha, zero);
  CHECK(hessian_error(same, [&](int i, int j, std::size_t) { return Complex{i == j ? 3.0 : 0.0, 0.0}; }) == 0.0);

  const HermitianField z = constant_field(g, CMatrix::Zero(2, 2));
  std::mt19937_64 rng(3);
  const Potential phi = dhym::testing::random_bump(g, rng, 0.3);
  const HermitianField hess = complex_hessian(phi);
  const HermitianField ap = alpha_phi(z, phi);
  CHECK(hessian_error(ap, [&](int i, int j, std::size_t p) { return hess.at(p)(i, j); }) == 0.0);

  // Weyl: eigenvalues move by at most the operator norm of the Hessian.
  const Eigen::MatrixXd e0 = pointwise_eigenvalues(alpha);
  const Eigen::MatrixXd e1 = pointwise_eigenvalues(alpha_phi(alpha, phi));
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Eigen::Index c = static_cast<Eigen::Index>(p);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(CMatrix(hess.at(p)), Eigen::EigenvaluesOnly);
    const double bound = es.eigenvalues().cwiseAbs().maxCoeff();
    CHECK((e1.col(c) - e0.col(c)).cwiseAbs().maxCoeff() <= bound + 1e-12);
  }

  CHECK_THROWS_AS(alpha_phi(alpha, Potential(TorusGrid(2, 10))), InvalidInput);
  CMatrix nonherm = CMatrix::Identity(2, 2);
  nonherm(0, 1) = Complex{1.0, 0.0};
  CHECK_THROWS_AS(constant_field(g, nonherm), InvalidInput);
  CHECK_THROWS_AS(constant_field(g, CMatrix::Identity(3, 3)), InvalidInput);
}

TEST_CASE("pointwise phase examples") {
  const TorusGrid g(2, 8);
  const PhaseFields a = pointwise_phase(constant_field(g, CMatrix::Identity(2, 2) * 3.0));
  CHECK(a.q.minCoeff() == doctest::Approx(0.6435011087932844).epsilon(1e-12));
  CHECK(a.q.maxCoeff() == doctest::Approx(0.6435011087932844).epsilon(1e-12));
  CHECK(a.min_eigenvalue.minCoeff() == doctest::Approx(3.0));
  const PhaseFields z = pointwise_phase(constant_field(g, CMatrix::Zero(2, 2)));
  CHECK(z.q.minCoeff() == doctest::Approx(kPi));
  const PhaseFields one = pointwise_phase(constant_field(g, CMatrix::Identity(2, 2)));
  CHECK(one.q.maxCoeff() == doctest::Approx(kPi / 2));
  CHECK(one.p.maxCoeff() == doctest::Approx(kPi / 4));
  const PhaseFields three = pointwise_phase(constant_field(TorusGrid(3, 8), CMatrix::Identity(3, 3)));
  CHECK(three.q.maxCoeff() == doctest::Approx(3 * kPi / 4));
}

TEST_CASE("volume ratio examples") {
  const TorusGrid g(2, 8);
  const VolumeRatios a = volume_ratios(constant_field(g, CMatrix::Identity(2, 2) * 3.0));
  CHECK(a.re.minCoeff() == doctest::Approx(8.0));
  CHECK(a.im.maxCoeff() == doctest::Approx(6.0));
  CHECK(a.singular_count() == 0);
  const VolumeRatios z = volume_ratios(constant_field(g, CMatrix::Zero(2, 2)));
  CHECK(z.re.minCoeff() == doctest::Approx(-1.0));
  CHECK(std::abs(z.im.maxCoeff()) <= 1e-15);
  CHECK(z.singular_count() == g.size());
  const VolumeRatios one = volume_ratios(constant_field(g, CMatrix::Identity(2, 2)));
  CHECK(std::abs(one.re.maxCoeff()) <= 1e-15);
  CHECK(one.im.minCoeff() == doctest::Approx(2.0));

  // rotation by the phase lands on the positive real axis
  const VolumeRatios r = a.rotated(std::atan2(6.0, 8.0));
  CHECK(r.re.minCoeff() == doctest::Approx(10.0));
  CHECK(std::abs(r.im.maxCoeff()) <= 1e-14);

  // polar identity re + i im = prod sqrt(1+l^2) e^{i Q}, up to the n-dependent sign convention
  std::mt19937_64 rng(8);
  const Potential phi = dhym::testing::random_bump(g, rng, 0.4);
  const HermitianField f = alpha_phi(constant_field(g, CMatrix::Identity(2, 2) * 2.0), phi);
  const Eigen::MatrixXd ev = pointwise_eigenvalues(f);
  const VolumeRatios v = volume_ratios(ev);
  for (Eigen::Index p = 0; p < ev.cols(); p += 37) {
    Complex prod{1.0, 0.0};
    for (Eigen::Index k = 0; k < ev.rows(); ++k) prod *= Complex{ev(k, p), 1.0};
    CHECK(v.re[p] == doctest::Approx(prod.real()).epsilon(1e-13));
    CHECK(v.im[p] == doctest::Approx(prod.imag()).epsilon(1e-13));
  }
}

TEST_CASE("integrate") {
  const TorusGrid g(1, 16);
  const Eigen::Index P = static_cast<Eigen::Index>(g.size());
  CHECK(integrate(Eigen::VectorXd::Ones(P), g) == doctest::Approx(4 * kPi * kPi));
  Eigen::VectorXd c(P);
  for (Eigen::Index p = 0; p < P; ++p) c[p] = std::cos(g.coordinate(static_cast<std::size_t>(p), 0));
  CHECK(std::abs(integrate(c, g)) <= 1e-12);
  CHECK_THROWS_AS(integrate(Eigen::VectorXd::Ones(3), g), InvalidInput);
}

TEST_CASE("periodic Gaussian integrates to the Bessel closed form") {
  // int_0^{2pi} exp(k (cos x - 1)) dx = 2 pi e^{-k} I0(k)
  const double kappa = std::pow(1.0 / 0.6, 2);
  const double exact1 = 2.0 * kPi * std::exp(-kappa) * std::cyl_bessel_i(0.0, kappa);
  const double exact = exact1 * exact1;
  double prev = 1.0;
  for (int N : {8, 16, 32}) {
    const TorusGrid g(1, N);
    PeriodicBump b;
    b.amplitude = 1.0;
    b.width = 0.6;
    b.center = {1.0, 2.5};
    const Potential phi = bump_potential(g, std::span(&b, 1));
    const double err = std::abs(integrate(phi.values(), g) - exact) / exact;
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev <= 1e-12);
}

TEST_CASE("recipes") {
  const TorusGrid g(1, 8);
  const TrigTerm t = term(0.5, {0, 1}, 0.3);
  const Potential phi = trig_potential(g, std::span(&t, 1));
  for (std::size_t p = 0; p < g.size(); p += 5)
    CHECK(phi[p] == doctest::Approx(0.5 * std::cos(g.coordinate(p, 1) + 0.3)));
  PeriodicBump b;
  b.amplitude = 2.0;
  b.center = {g.coordinate(9, 0), g.coordinate(9, 1)};
  const Potential bump = bump_potential(g, std::span(&b, 1));
  CHECK(bump.sup() == doctest::Approx(2.0));
  CHECK(bump[9] == doctest::Approx(2.0));
  b.width = 0.0;
  CHECK_THROWS_AS(bump_potential(g, std::span(&b, 1)), InvalidInput);
}
