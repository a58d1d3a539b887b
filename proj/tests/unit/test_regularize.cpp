#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "dhym/error.hpp"
#include "dhym/regularize.hpp"
#include "test_support.hpp"

using namespace dhym;
using dhym::testing::kPi;

namespace {

CalibrationData diag_class(int n, int N, double lambda) {
  const TorusGrid g(n, N);
  return compute_theta0(constant_field(g, CMatrix::Identity(n, n) * lambda));
}

Potential sample_bump(const TorusGrid& g) {
  PeriodicBump b{0.3, {1.0, 2.0}, 0.8};
  return bump_potential(g, std::span(&b, 1));
}

// E[max(v0 + eta H0, v1 + eta H1)] by a composite midpoint rule on [-1, 1]^2
double brute_max2(double v0, double v1, double eta) {
  const int m = 2000;
  const double w = 2.0 / m;
  auto density = [](double h) { return 35.0 / 32.0 * std::pow(1.0 - h * h, 3); };
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const double a = -1.0 + (i + 0.5) * w;
    const double da = density(a);
    for (int j = 0; j < m; ++j) {
      const double b = -1.0 + (j + 0.5) * w;
      total += da * density(b) * std::max(v0 + eta * a, v1 + eta * b);
    }
  }
  return total * w * w;
}

}  // namespace

TEST_CASE("mollifier weights") {
  CHECK_THROWS_AS(MollifierSpec(1.5), InvalidInput);
  for (int axes : {2, 4}) {
    const auto ws = MollifierSpec(2.5).weights(axes);
    double mass = 0.0;
    for (const auto& w : ws) {
      CHECK(w.w > 0.0);
      double r2 = 0.0;
      for (int a = 0; a < axes; ++a) r2 += w.offset[static_cast<std::size_t>(a)] * w.offset[static_cast<std::size_t>(a)];
      CHECK(r2 < 2.5 * 2.5);
      mass += w.w;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("mollify constants and Fourier modes") {
  const TorusGrid g(1, 32);
  const MollifierSpec spec(3.0);
  const Potential k = Potential(g).plus_constant(1.7);
  CHECK((mollify(k, spec).values().array() - 1.7).abs().maxCoeff() <= 1e-14);

  const TrigTerm t{1.0, {2, 1}, 0.3};
  const Potential phi = trig_potential(g, std::span(&t, 1));
  const Potential m = mollify(phi, spec);
  double symbol = 0.0;
  for (const auto& w : spec.weights(2)) symbol += w.w * std::cos(g.h() * (2 * w.offset[0] + w.offset[1]));
  CHECK(symbol < 1.0);
  for (std::size_t p = 0; p < g.size(); p += 17) CHECK(m[p] == doctest::Approx(symbol * phi[p]).epsilon(1e-13));

  // direct convolution at one point
  const std::size_t p = 301;
  double direct = 0.0;
  for (const auto& w : spec.weights(2)) direct += w.w * phi[g.shift(p, w.offset)];
  CHECK(m[p] == doctest::Approx(direct).epsilon(1e-14));

  const HermitianField f = constant_field(TorusGrid(2, 8), CMatrix::Identity(2, 2) * 2.0);
  const HermitianField mf = mollify(f, MollifierSpec(2.0));
  CHECK(std::abs(mf.at(100)(1, 1) - Complex{2.0, 0.0}) <= 1e-14);
}

TEST_CASE("phase and positivity after mollification") {
  const CalibrationData flat = diag_class(1, 16, 2.0);
  const MollifyReport same = phase_after_mollify_check(flat, Potential(flat.grid()), MollifierSpec(2.5));
  CHECK(std::abs(same.phase_slack) <= 1e-14);
  CHECK(std::abs(same.psh_slack) <= 1e-14);
  CHECK(same.phase_shift <= 1e-14);

  double prev_shift = 0.0;
  for (int N : {16, 32, 64}) {
    const CalibrationData c = diag_class(1, N, 2.0);
    const MollifyReport r = phase_after_mollify_check(c, sample_bump(c.grid()), MollifierSpec(2.5));
    CHECK(r.phase_slack <= 1e-12);
    CHECK(r.psh_slack >= -1e-10);
    CHECK(r.hessian_commutation <= 1e-10);
    if (N == 64) CHECK(prev_shift / r.phase_shift >= 3.0);
    if (prev_shift > 0.0) CHECK(r.phase_shift < prev_shift);
    prev_shift = r.phase_shift;
  }

  const CalibrationData c2 = diag_class(2, 8, 2.0);
  std::mt19937_64 rng(6);
  const MollifyReport r2 = phase_after_mollify_check(c2, dhym::testing::random_bump(c2.grid(), rng, 0.3), MollifierSpec(2.0));
  CHECK(r2.phase_slack <= 1e-12);
  CHECK(r2.psh_slack >= -1e-10);
  CHECK(r2.hessian_commutation <= 1e-10);
}

TEST_CASE("regularized max examples") {
  const std::vector<double> one{0.37};
  CHECK(regularized_max(one, 0.1) == 0.37);
  const std::vector<double> zz{0.0, 0.0};
  const double m = regularized_max(zz, 0.1);
  CHECK(m >= 0.0);
  CHECK(m <= 0.1);
  CHECK(m == doctest::Approx(brute_max2(0.0, 0.0, 0.1)).epsilon(1e-6));
  const double eta = 0.05;
  const std::vector<double> far{1.0, 1.0 - 3.0 * eta};
  CHECK(regularized_max(far, eta) == 1.0);
  const std::vector<double> near{0.2, 0.17};
  CHECK(regularized_max(near, eta) == doctest::Approx(brute_max2(0.2, 0.17, eta)).epsilon(1e-6));
  const std::vector<double> rev{0.17, 0.2};
  CHECK(regularized_max(rev, eta) == regularized_max(near, eta));

  CHECK_THROWS_AS(regularized_max(std::vector<double>{}, 0.1), InvalidInput);
  CHECK_THROWS_AS(regularized_max(one, 0.0), InvalidInput);
  CHECK_THROWS_AS(regularized_max(std::vector<double>{std::nan("")}, 0.1), InvalidInput);
}

TEST_CASE("regularized max: sandwich, locality, symmetry, convexity") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double lo = 0.0, hi = 0.0, convex = 0.0;
  for (int s = 0; s < 10000; ++s) {
    const std::size_t m = 1 + static_cast<std::size_t>(s % 5);
    const double eta = 0.05 + 0.2 * (u(rng) + 1.0);
    std::vector<double> v(m), w(m);
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = u(rng);
      w[i] = u(rng);
    }
    const double top = *std::max_element(v.begin(), v.end());
    const double r = regularized_max(v, eta);
    lo = std::max(lo, top - r);
    hi = std::max(hi, r - top - eta);

    std::vector<double> extended = v;
    extended.push_back(top - 2.0 * eta - 0.5 * (u(rng) + 1.0) * eta);
    std::shuffle(extended.begin(), extended.end(), rng);
    CHECK(regularized_max(extended, eta) == r);

    std::vector<double> mid(m);
    for (std::size_t i = 0; i < m; ++i) mid[i] = 0.5 * (v[i] + w[i]);
    const double gap = 0.5 * (r + regularized_max(w, eta)) - regularized_max(mid, eta);
    convex = std::min(convex, gap);
  }
  CHECK(lo <= 1e-14);
  CHECK(hi <= 1e-14);
  CHECK(convex >= -1e-12);
}

TEST_CASE("gluing") {
  const CalibrationData c = diag_class(1, 32, 2.0);
  const TorusGrid& g = c.grid();
  const Potential u = sample_bump(g);

  GluePatch whole{std::vector<std::uint8_t>(g.size(), 1), std::vector<std::uint8_t>(g.size(), 0), u};
  const GlueResult single = glue(c, {whole}, 0.01);
  CHECK(single.phi.values() == u.values());
  CHECK(single.max_cover == 1);

  GluePatch low = whole;
  low.potential = u.plus_constant(-0.5);
  low.boundary.assign(g.size(), 1);
  const GlueResult dominant = glue(c, {whole, low}, 0.01);
  CHECK(dominant.phi.values() == u.values());
  CHECK(dominant.max_cover == 2);

  GluePatch close = low;
  close.potential = u.plus_constant(-0.015);
  try {
    glue(c, {whole, close}, 0.01);
    FAIL("expected GluingGap");
  } catch (const GluingGap& e) {
    CHECK(e.point() == 0);
  }

  const double L = g.L();
  const std::vector<GluePatch> patches = make_box_patches(u, 4, 3.0 * L / 16.0, 0.05);
  CHECK(patches.size() == 16);
  for (std::size_t p = 0; p < g.size(); ++p) {
    int covered = 0;
    for (const GluePatch& pt : patches) covered += pt.cover[p] && !pt.boundary[p];
    CHECK(covered >= 1);
  }
  const GlueResult r = glue(c, patches, 0.01);
  CHECK(r.min_patch_margin > 0.0);
  CHECK(r.glued_margin >= r.min_patch_margin - 1e-10);
  CHECK(std::isfinite(r.c2_norm));

  // Seam gradient jumps: h |phi''| once h resolves the smoothed kink of width ~ eta / |grad gap|.
  std::vector<double> jumps;
  for (int N : {32, 64, 128, 256}) {
    const CalibrationData cn = diag_class(1, N, 2.0);
    const Potential un = sample_bump(cn.grid());
    jumps.push_back(glue(cn, make_box_patches(un, 4, 3.0 * L / 16.0, 0.05), 0.01).max_gradient_jump);
  }
  MESSAGE("seam jumps " << jumps[0] << " " << jumps[1] << " " << jumps[2] << " " << jumps[3]);
  for (std::size_t i = 1; i < jumps.size(); ++i) CHECK(jumps[i] < jumps[i - 1]);
  CHECK(jumps[2] / jumps[3] >= 1.5);

  CHECK_THROWS_AS(glue(c, {}, 0.01), InvalidInput);
  CHECK_THROWS_AS(make_box_patches(u, 0, 1.0, 0.0), InvalidInput);
  GluePatch hole = whole;
  hole.boundary.assign(g.size(), 1);
  CHECK_THROWS_AS(glue(c, {hole}, 0.01), InvalidInput);
}
