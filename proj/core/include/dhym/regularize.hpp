#pragma once

// Mollification, the regularized maximum, and gluing of local potentials.

#include <cstdint>
#include <span>
#include <vector>

#include "dhym/functionals.hpp"

namespace dhym {

/// Radial bump exp(-1 / (1 - s^2)), s = |offset| / radius in grid units,
/// renormalized to unit discrete mass.
class MollifierSpec {
 public:
  explicit MollifierSpec(double radius);

  double radius() const noexcept { return radius_; }

  struct Weight {
    std::array<int, 2 * kMaxComplexDim> offset{};
    double w = 0.0;
  };
  /// Offsets with positive weight on a grid with the given number of axes.
  std::vector<Weight> weights(int axes) const;

 private:
  double radius_;
};

Potential mollify(const Potential& u, const MollifierSpec& spec);
HermitianField mollify(const HermitianField& field, const MollifierSpec& spec);

struct MollifyReport {
  /// max over points of Q(mollified alpha_u) - max over the kernel ball of Q(alpha_u);
  /// <= 0 up to roundoff when cot Q is concave along the averaged values
  double phase_slack = 0.0;
  /// min over points of lambda_min(mollified chi_u) - min over the ball of lambda_min(chi_u)
  double psh_slack = 0.0;
  /// max |ddbar(u^(r)) - (ddbar u)^(r)|
  double hessian_commutation = 0.0;
  /// max |Q(alpha + ddbar u^(r)) - Q(alpha_u)|
  double phase_shift = 0.0;
};

MollifyReport phase_after_mollify_check(const CalibrationData& cal, const Potential& u,
                                        const MollifierSpec& spec);

/// Smooth convex symmetric regularization of max with
///   max(v) <= M_eta(v) <= max(v) + eta,
/// exactly unaffected by entries <= max(v) - 2 eta.
/// M_eta(v) = E[max_j (v_j + eta H_j)], H_j i.i.d. with density 35/32 (1 - h^2)^3.
double regularized_max(std::span<const double> values, double eta);

struct GluePatch {
  /// 1 where the patch is defined
  std::vector<std::uint8_t> cover;
  /// 1 on the outer band of the patch, where it must be dominated by 2 eta
  std::vector<std::uint8_t> boundary;
  Potential potential;
};

/// Boxes centred on a per_axis^{2n} lattice of centres with half-width
/// half_width (physical units); the local potential is u - kappa d^2, d the
/// periodic distance to the centre. The boundary band is `band` cells wide.
std::vector<GluePatch> make_box_patches(const Potential& u, int per_axis, double half_width,
                                        double kappa, int band = 2);

struct GlueResult {
  Potential phi;
  /// min over patches of the cone margin of alpha_{patch} on the patch interior
  double min_patch_margin = 0.0;
  /// cone margin of alpha_{glued}
  double glued_margin = 0.0;
  int max_cover = 0;
  /// max |complex Hessian entry| of the glued potential
  double c2_norm = 0.0;
  /// max jump of one-sided first differences between neighbouring points
  double max_gradient_jump = 0.0;
};

/// Pointwise regularized max over covering patches. Throws GluingGap when a
/// patch fails to trail the covering max by more than 2 eta on its band.
GlueResult glue(const CalibrationData& cal, const std::vector<GluePatch>& patches, double eta);

}  // namespace dhym
