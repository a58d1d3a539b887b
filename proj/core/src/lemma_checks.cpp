#include "dhym/lemma_checks.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dhym/error.hpp"

namespace dhym {

ConeSampler::ConeSampler(int n, ConeSpec cone, std::uint64_t seed, double max_abs)
    : n_(n),
      cone_(cone),
      min_angle_(arccot(max_abs)),
      max_angle_(arccot(-max_abs)),
      rng_(seed) {
  if (n < 1) throw InvalidInput("sampler dimension must be >= 1");
}

std::vector<double> ConeSampler::next_unsorted() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double total = cone_.Theta() * unit(rng_);
    std::vector<double> w(static_cast<std::size_t>(n_));
    double sum = 0.0;
    for (double& x : w) {
      x = expo(rng_);
      sum += x;
    }
    std::vector<double> lambda(static_cast<std::size_t>(n_));
    bool ok = true;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double angle = total * w[i] / sum;
      if (angle < min_angle_ || angle > max_angle_) {
        ok = false;
        break;
      }
      lambda[i] = 1.0 / std::tan(angle);
    }
    if (!ok) continue;
    const ConeMembership m = in_cone(lambda, cone_);
    if (m.inside) return lambda;
  }
  throw InvalidInput("cone sampler could not draw a point; cone too thin");
}

PhaseVector ConeSampler::next() { return PhaseVector(next_unsorted()); }

CMatrix random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = Complex{gauss(rng), gauss(rng)};
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ() * CMatrix::Identity(n, n);
}

CMatrix random_hpd(int n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> spec(lo, hi);
  const CMatrix u = random_unitary(n, rng);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d[i] = spec(rng);
  CMatrix a = u * d.cast<Complex>().asDiagonal() * u.adjoint();
  return 0.5 * (a + a.adjoint());
}

namespace {

CMatrix hermitian_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cast<Complex>().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

PerturbationReport check_perturbation_lemmas(const PerturbationConfig& cfg) {
  if (cfg.n < 1 || cfg.samples < 1) throw InvalidInput("perturbation sampler needs n, samples >= 1");
  if (!(cfg.sigma > 0.0) || !(cfg.f_sigma > 0.0)) throw InvalidInput("sigma must be positive");
  const ConeSpec cone(cfg.theta, cfg.Theta);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);

  // B is drawn through its A1-relative eigenvalues; the cone sampler over
  // (0, pi - c0) x (0, pi - c0) supplies Q_{A1}(B) in the Q/P continuity range.
  const double q_cap = std::numbers::pi - cfg.c0;
  ConeSampler wide(cfg.n, ConeSpec(std::min(q_cap, cfg.Theta) * 0.999, q_cap), cfg.seed ^ 0x9e37);
  ConeSampler narrow(cfg.n, cone, cfg.seed ^ 0x7f4a);

  const double band = std::pow(cfg.sigma, 5);
  const double f_band = std::pow(cfg.f_sigma, 5);
  PerturbationReport r;
  r.empirical_c0 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < cfg.samples; ++s) {
    ++r.samples;
    const CMatrix a1 = random_hpd(cfg.n, rng);
    const CMatrix root = hermitian_sqrt(a1);
    // A2 = A1^{1/2} (I + band E) A1^{1/2} with ||E|| <= 1.
    CMatrix e = random_unitary(cfg.n, rng);
    Eigen::VectorXd de(cfg.n);
    for (int i = 0; i < cfg.n; ++i) de[i] = sym(rng);
    e = e * de.cast<Complex>().asDiagonal() * e.adjoint();
    auto perturbed = [&](double width) {
      CMatrix a = root * (CMatrix::Identity(cfg.n, cfg.n) + width * e) * root;
      return CMatrix(0.5 * (a + a.adjoint()));
    };
    const CMatrix a2 = perturbed(band);

    PhaseVector lam = (s % 2 == 0) ? wide.next() : narrow.next();
    const CMatrix u = random_unitary(cfg.n, rng);
    CMatrix b = root * u * lam.to_eigen().cast<Complex>().asDiagonal() * u.adjoint() * root;
    b = 0.5 * (b + b.adjoint()).eval();

    PhaseVector l1 = gen_eigenvalues(HermitianPencil(a1, b));
    PhaseVector l2 = gen_eigenvalues(HermitianPencil(a2, b));
    const double q1 = phase_q(l1);
    const double q2 = phase_q(l2);
    const double p1 = phase_p(l1);
    const double p2 = phase_p(l2);
    if (!(q1 > 0.0 && q1 < q_cap)) {
      ++r.skipped;
      continue;
    }
    r.max_q_increase = std::max(r.max_q_increase, q2 - q1);
    ++r.q_continuity_checked;
    if (q2 > q1 + cfg.sigma) ++r.q_continuity_violations;
    if (p1 > 0.0 && p1 < q_cap) {
      ++r.p_continuity_checked;
      if (p2 > p1 + cfg.sigma) ++r.p_continuity_violations;
    }
    const PhaseVector l3 = gen_eigenvalues(HermitianPencil(perturbed(f_band), b));
    if (q1 > cfg.c0 && q1 < q_cap && std::sin(phase_q(l3)) > 1e-12) {
      const double f1 = f_eps(l1, cfg.eps);
      const double f2 = f_eps(l3, cfg.eps);
      ++r.f_continuity_checked;
      r.max_f_decrease = std::max(r.max_f_decrease, f1 - f2);
      if (f2 < f1 - cfg.eps * cfg.eps) ++r.f_continuity_violations;
    }
    if (q1 < cfg.Theta && std::sin(q1) > 1e-12) {
      const double f1 = f_eps(l1, cfg.eps);
      if (f1 >= 1.0 / std::tan(cfg.theta) + cfg.eps) {
        ++r.qfp_checked;
        if (!(p1 < cfg.theta)) ++r.qfp_violations;
        r.empirical_c0 = std::min(r.empirical_c0, (cfg.theta - p1) / cfg.eps);
      }
    }
  }
  if (r.qfp_checked == 0) r.empirical_c0 = 0.0;
  return r;
}

ConcavitySearch search_concavity_counterexample(int n, double eps, const ConeSpec& cone,
                                                int samples, std::uint64_t seed) {
  ConeSampler sampler(n, cone, seed);
  ConcavitySearch out;
  for (int s = 0; s < samples; ++s) {
    const PhaseVector lam = sampler.next();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess_f_eps(lam, eps),
                                                      Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    ++out.samples;
    if (top > out.max_hessian_eigenvalue) {
      out.max_hessian_eigenvalue = top;
      out.worst_lambda.assign(lam.entries().begin(), lam.entries().end());
    }
  }
  return out;
}

}  // namespace dhym
