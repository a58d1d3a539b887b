#include "dhym/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "dhym/error.hpp"
#include "dhym/numerics.hpp"

namespace dhym {

namespace {

using Offset = std::array<int, 2 * kMaxComplexDim>;

// CDF of the density 35/32 (1 - h^2)^3 on [-1, 1].
double triweight_cdf(double u) {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double u2 = u * u;
  return 0.5 + (35.0 / 32.0) * u * (1.0 - u2 + 0.6 * u2 * u2 - u2 * u2 * u2 / 7.0);
}

const GaussRule& unit_rule(int m) {
  thread_local std::map<int, GaussRule> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, gauss_legendre(m, 0.0, 1.0)).first;
  return it->second;
}

std::vector<std::size_t> neighbours(const TorusGrid& g, std::size_t p,
                                    const std::vector<MollifierSpec::Weight>& ws) {
  std::vector<std::size_t> out;
  out.reserve(ws.size());
  for (const auto& w : ws) out.push_back(g.shift(p, w.offset));
  return out;
}

Eigen::VectorXd cone_margins(const CalibrationData& cal, const PointwiseForms& f) {
  return (cal.theta0 - f.phase.p.array()).min(cal.Theta0 - f.phase.q.array()).matrix();
}

}  // namespace

MollifierSpec::MollifierSpec(double radius) : radius_(radius) {
  if (!(radius >= 2.0) || !std::isfinite(radius)) {
    throw InvalidInput("mollifier radius must be at least 2 grid cells");
  }
}

std::vector<MollifierSpec::Weight> MollifierSpec::weights(int axes) const {
  const int reach = static_cast<int>(std::ceil(radius_));
  std::vector<Weight> out;
  Offset o{};
  std::function<void(int)> walk = [&](int a) {
    if (a == axes) {
      double r2 = 0.0;
      for (int b = 0; b < axes; ++b) r2 += double(o[static_cast<std::size_t>(b)]) * o[static_cast<std::size_t>(b)];
      const double s2 = r2 / (radius_ * radius_);
      if (s2 < 1.0) out.push_back({o, std::exp(-1.0 / (1.0 - s2))});
      return;
    }
    for (int v = -reach; v <= reach; ++v) {
      o[static_cast<std::size_t>(a)] = v;
      walk(a + 1);
    }
    o[static_cast<std::size_t>(a)] = 0;
  };
  walk(0);
  double mass = 0.0;
  for (const Weight& w : out) mass += w.w;
  for (Weight& w : out) w.w /= mass;
  return out;
}

Potential mollify(const Potential& u, const MollifierSpec& spec) {
  const TorusGrid& g = u.grid();
  const auto ws = spec.weights(g.axes());
  Potential out(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    double acc = 0.0;
    for (const auto& w : ws) acc += w.w * u[g.shift(p, w.offset)];
    out.values()[static_cast<Eigen::Index>(p)] = acc;
  }
  return out;
}

HermitianField mollify(const HermitianField& field, const MollifierSpec& spec) {
  const TorusGrid& g = field.grid();
  const auto ws = spec.weights(g.axes());
  HermitianField out(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    CMatrix acc = CMatrix::Zero(g.n(), g.n());
    for (const auto& w : ws) acc += w.w * field.at(g.shift(p, w.offset));
    out.at(p) = 0.5 * (acc + acc.adjoint());
  }
  return out;
}

MollifyReport phase_after_mollify_check(const CalibrationData& cal, const Potential& u,
                                        const MollifierSpec& spec) {
  const TorusGrid& g = u.grid();
  const auto ws = spec.weights(g.axes());
  const HermitianField au = alpha_phi(cal.alpha, u);
  const PointwiseForms fu = evaluate_forms(au);
  const PointwiseForms fm = evaluate_forms(mollify(au, spec));

  MollifyReport r;
  r.phase_slack = -std::numeric_limits<double>::infinity();
  r.psh_slack = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < g.size(); ++p) {
    double ball_q = -std::numeric_limits<double>::infinity();
    double ball_lmin = std::numeric_limits<double>::infinity();
    for (std::size_t q : neighbours(g, p, ws)) {
      ball_q = std::max(ball_q, fu.phase.q[static_cast<Eigen::Index>(q)]);
      ball_lmin = std::min(ball_lmin, fu.phase.min_eigenvalue[static_cast<Eigen::Index>(q)]);
    }
    const auto i = static_cast<Eigen::Index>(p);
    r.phase_slack = std::max(r.phase_slack, fm.phase.q[i] - ball_q);
    // chi = alpha + tan(theta0) I shifts both sides equally.
    r.psh_slack = std::min(r.psh_slack, fm.phase.min_eigenvalue[i] - ball_lmin);
  }

  const Potential um = mollify(u, spec);
  const HermitianField h1 = complex_hessian(um);
  const HermitianField h2 = mollify(complex_hessian(u), spec);
  const PointwiseForms fr = evaluate_forms(cal, um);
  for (std::size_t p = 0; p < g.size(); ++p) {
    r.hessian_commutation = std::max(r.hessian_commutation, (h1.at(p) - h2.at(p)).cwiseAbs().maxCoeff());
    const auto i = static_cast<Eigen::Index>(p);
    r.phase_shift = std::max(r.phase_shift, std::abs(fr.phase.q[i] - fu.phase.q[i]));
  }
  return r;
}

double regularized_max(std::span<const double> values, double eta) {
  if (values.empty()) throw InvalidInput("regularized max of an empty tuple");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("eta must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("regularized max needs finite values");
  }
  const double top = *std::max_element(values.begin(), values.end());
  // Entries at or below top - 2 eta can never attain the max of v_j + eta H_j.
  std::vector<double> y;
  for (double v : values) {
    if (v > top - 2.0 * eta) y.push_back((v - top) / eta);
  }
  if (y.size() == 1) return top;
  std::sort(y.begin(), y.end(), std::greater<>());

  // In units of eta: E[max_j (y_j + H_j)] = -1 + int_{-1}^{1} (1 - prod_j K(x - y_j)) dx.
  std::vector<double> breaks{-1.0, 1.0};
  for (double v : y) {
    for (double b : {v - 1.0, v + 1.0}) {
      if (b > -1.0 && b < 1.0) breaks.push_back(b);
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const int degree = 7 * static_cast<int>(y.size());
  const GaussRule& rule = unit_rule(degree / 2 + 1);
  double integral = 0.0;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s];
    const double w = breaks[s + 1] - a;
    double piece = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double x = a + w * rule.nodes[k];
      double prod = 1.0;
      for (double v : y) prod *= triweight_cdf(x - v);
      piece += rule.weights[k] * (1.0 - prod);
    }
    integral += w * piece;
  }
  return top + eta * (integral - 1.0);
}

std::vector<GluePatch> make_box_patches(const Potential& u, int per_axis, double half_width,
                                        double kappa, int band) {
  const TorusGrid& g = u.grid();
  if (per_axis < 1) throw InvalidInput("need at least one patch per axis");
  if (!(half_width > 0.0)) throw InvalidInput("patch half-width must be positive");
  if (band < 0) throw InvalidInput("boundary band must be >= 0");
  const int axes = g.axes();
  const double L = g.L();
  const double spacing = L / per_axis;
  const double inner = half_width - band * g.h();
  const double slack = 1e-12 * L;

  std::size_t count = 1;
  for (int a = 0; a < axes; ++a) count *= static_cast<std::size_t>(per_axis);

  std::vector<GluePatch> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    std::array<double, 2 * kMaxComplexDim> centre{};
    std::size_t rest = c;
    for (int a = 0; a < axes; ++a) {
      centre[static_cast<std::size_t>(a)] = static_cast<double>(rest % static_cast<std::size_t>(per_axis)) * spacing;
      rest /= static_cast<std::size_t>(per_axis);
    }
    GluePatch patch{std::vector<std::uint8_t>(g.size(), 0), std::vector<std::uint8_t>(g.size(), 0),
                    Potential(g)};
    for (std::size_t p = 0; p < g.size(); ++p) {
      double d2 = 0.0;
      double sup = 0.0;
      for (int a = 0; a < axes; ++a) {
        double d = g.coordinate(p, a) - centre[static_cast<std::size_t>(a)];
        d -= L * std::round(d / L);
        d2 += d * d;
        sup = std::max(sup, std::abs(d));
      }
      patch.potential.values()[static_cast<Eigen::Index>(p)] = u[p] - kappa * d2;
      if (sup <= half_width + slack) {
        patch.cover[p] = 1;
        if (sup > inner + slack) patch.boundary[p] = 1;
      }
    }
    out.push_back(std::move(patch));
  }
  return out;
}

GlueResult glue(const CalibrationData& cal, const std::vector<GluePatch>& patches, double eta) {
  if (patches.empty()) throw InvalidInput("gluing needs at least one patch");
  if (!(eta > 0.0)) throw InvalidInput("eta must be positive");
  const TorusGrid& g = patches.front().potential.grid();
  for (const GluePatch& pt : patches) {
    if (!(pt.potential.grid() == g) || pt.cover.size() != g.size() ||
        pt.boundary.size() != g.size()) {
      throw InvalidInput("patch does not match the grid");
    }
  }

  GlueResult r{Potential(g), std::numeric_limits<double>::infinity(), 0.0, 0, 0.0, 0.0};
  std::vector<double> vals;
  for (std::size_t p = 0; p < g.size(); ++p) {
    vals.clear();
    double top = -std::numeric_limits<double>::infinity();
    bool interior = false;
    for (const GluePatch& pt : patches) {
      if (!pt.cover[p]) continue;
      vals.push_back(pt.potential[p]);
      top = std::max(top, pt.potential[p]);
      if (!pt.boundary[p]) interior = true;
    }
    if (!interior) {
      std::ostringstream os;
      os << "point " << p << " lies in no patch interior";
      throw InvalidInput(os.str());
    }
    for (const GluePatch& pt : patches) {
      if (pt.cover[p] && pt.boundary[p] && !(pt.potential[p] < top - 2.0 * eta)) {
        std::ostringstream os;
        os << "gluing gap violated at point " << p << ": patch value " << pt.potential[p]
           << " vs covering max " << top << " - 2 eta";
        throw GluingGap(os.str(), static_cast<long>(p));
      }
    }
    r.max_cover = std::max(r.max_cover, static_cast<int>(vals.size()));
    r.phi.values()[static_cast<Eigen::Index>(p)] = regularized_max(vals, eta);
  }

  for (const GluePatch& pt : patches) {
    const Eigen::VectorXd m = cone_margins(cal, evaluate_forms(cal, pt.potential));
    for (std::size_t p = 0; p < g.size(); ++p) {
      if (pt.cover[p] && !pt.boundary[p]) {
        r.min_patch_margin = std::min(r.min_patch_margin, m[static_cast<Eigen::Index>(p)]);
      }
    }
  }
  r.glued_margin = cone_margins(cal, evaluate_forms(cal, r.phi)).minCoeff();

  const HermitianField hess = complex_hessian(r.phi);
  for (std::size_t p = 0; p < g.size(); ++p) {
    r.c2_norm = std::max(r.c2_norm, hess.at(p).cwiseAbs().maxCoeff());
    for (int a = 0; a < g.axes(); ++a) {
      Offset e{};
      e[static_cast<std::size_t>(a)] = 1;
      const std::size_t q = g.shift(p, e);
      const std::size_t s = g.shift(q, e);
      const double jump = std::abs(r.phi[s] - 2.0 * r.phi[q] + r.phi[p]) / g.h();
      r.max_gradient_jump = std::max(r.max_gradient_jump, jump);
    }
  }
  return r;
}

}  // namespace dhym
