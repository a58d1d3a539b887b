#pragma once

// Randomized samplers over the cone Gamma_{theta,Theta} and Hermitian pencils,
// and the sampled checks of the metric-perturbation lemmas for Q, P and F_eps.

#include <cstdint>
#include <random>
#include <vector>

#include "dhym/eigenops.hpp"

namespace dhym {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

/// Draws eigenvalue vectors inside Gamma_{theta,Theta} with |lambda_i| <= max_abs.
/// Angles arccot(lambda_i) are a Dirichlet split of a uniform total phase.
class ConeSampler {
 public:
  ConeSampler(int n, ConeSpec cone, std::uint64_t seed = kDefaultSeed, double max_abs = 1e3);

  PhaseVector next();
  /// Same draw before sorting, for permutation tests.
  std::vector<double> next_unsorted();

  std::mt19937_64& engine() noexcept { return rng_; }

 private:
  int n_;
  ConeSpec cone_;
  double min_angle_;
  double max_angle_;
  std::mt19937_64 rng_;
};

/// Random Hermitian positive-definite matrix with spectrum in [lo, hi].
CMatrix random_hpd(int n, std::mt19937_64& rng, double lo = 0.5, double hi = 2.0);
/// Random unitary (QR of a complex Gaussian matrix).
CMatrix random_unitary(int n, std::mt19937_64& rng);

struct PerturbationConfig {
  int n = 4;
  int samples = 10000;
  /// band parameter of the Q/P continuity checks
  double sigma = 0.1;
  /// band parameter of the F-continuity check; must lie below sigma_eps(eps)
  double f_sigma = 0.02;
  /// eps used by the F-continuity and Q-F-P checks.
  double eps = 1e-3;
  /// c0 of the Q/P continuity hypotheses: Q_{A1}(B), P_{A1}(B) in (0, pi - c0).
  double c0 = 0.2;
  /// Cone for the Q-F-P check.
  double theta = 1.2;
  double Theta = 2.4;
  std::uint64_t seed = kDefaultSeed;
};

struct PerturbationReport {
  int samples = 0;
  int skipped = 0;
  int q_continuity_checked = 0;
  int q_continuity_violations = 0;
  int p_continuity_checked = 0;
  int p_continuity_violations = 0;
  int f_continuity_checked = 0;
  int f_continuity_violations = 0;
  int qfp_checked = 0;
  int qfp_violations = 0;
  /// max over samples of Q_{A2}(B) - Q_{A1}(B)
  double max_q_increase = 0.0;
  /// max over samples of F_{A1}(B) - F_{A3}(B)
  double max_f_decrease = 0.0;
  /// min over Q-F-P hits of (theta - P) / eps: the empirical c0
  double empirical_c0 = 0.0;

  int total_violations() const {
    return q_continuity_violations + p_continuity_violations + f_continuity_violations +
           qfp_violations;
  }
};

/// Draws (A1, A2, B) with (1 - sigma^5) A1 <= A2 <= (1 + sigma^5) A1 and checks
///   Q_{A2}(B) <= Q_{A1}(B) + sigma, P_{A2}(B) <= P_{A1}(B) + sigma,
///   F_{A3,eps}(B) >= F_{A1,eps}(B) - eps^2 with A3 in the f_sigma band,
/// and, whenever Q < Theta and F_eps >= cot(theta) + eps, that P < theta.
PerturbationReport check_perturbation_lemmas(const PerturbationConfig& config);

/// Largest Hessian eigenvalue of F_eps found over random cone samples.
/// Diagnostic only: for n <= 3 F_eps need not be concave.
struct ConcavitySearch {
  double max_hessian_eigenvalue = -std::numeric_limits<double>::infinity();
  std::vector<double> worst_lambda;
  int samples = 0;
};

ConcavitySearch search_concavity_counterexample(int n, double eps, const ConeSpec& cone,
                                                int samples,
                                                std::uint64_t seed = kDefaultSeed);

}  // namespace dhym
