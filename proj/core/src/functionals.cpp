#include "dhym/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dhym/error.hpp"
#include "dhym/numerics.hpp"

namespace dhym {

namespace {

constexpr double kDegenerateIntegral = 1e-10;
constexpr double kHypercriticalTol = 1e-12;

void require_nodes(int nodes) {
  if (nodes < 1) throw InvalidInput("quadrature needs at least one node");
}

void check_path(const CalibrationData& cal, const PointwiseForms& forms, double t) {
  const Membership m = membership(cal, forms, 0.0);
  if (!m.inside) {
    std::ostringstream os;
    os << "path t*phi leaves H at t = " << t << " (margin " << m.margin << ")";
    throw PathExit(os.str(), t);
  }
}

// int_0^1 int phi * density(forms of alpha_{t phi}) dt
template <class Density>
double path_integral(const CalibrationData& cal, const Potential& phi, int nodes,
                     Density&& density) {
  require_nodes(nodes);
  if (!(phi.grid() == cal.grid())) throw InvalidInput("potential and class live on different grids");
  const GaussRule rule = gauss_legendre(nodes);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = rule.nodes[k];
    const PointwiseForms forms = evaluate_forms(cal, phi * t);
    check_path(cal, forms, t);
    const Eigen::VectorXd integrand = phi.values().cwiseProduct(density(forms));
    total += rule.weights[k] * integrate(integrand, cal.grid());
  }
  return total;
}

}  // namespace

CalibrationData compute_theta0(const HermitianField& alpha) {
  const VolumeRatios vr = volume_ratios(alpha);
  const TorusGrid& g = alpha.grid();
  const double re = integrate(vr.re, g);
  const double im = integrate(vr.im, g);
  if (std::hypot(re, im) <= kDegenerateIntegral) {
    throw DegenerateClass("int (alpha + i omega)^n vanishes; theta0 undefined");
  }
  const double theta0 = std::atan2(im, re);
  if (!(theta0 > kHypercriticalTol && theta0 < std::numbers::pi / 2.0 - kHypercriticalTol)) {
    std::ostringstream os;
    os << "theta0 = " << theta0 << " is not in (0, pi/2)";
    throw NotHypercritical(os.str(), theta0);
  }
  CalibrationData cal{alpha, alpha, theta0, 0.0, 0.0, 0.0, 0.0};
  cal.theta0_hat = alpha.n() * std::numbers::pi / 2.0 - theta0;
  cal.Theta0 = theta0 + std::numbers::pi / 2.0;
  cal.a0 = g.volume() / im;
  cal.cot_theta0 = 1.0 / std::tan(theta0);
  const CMatrix shift = std::tan(theta0) * CMatrix::Identity(alpha.n(), alpha.n());
  cal.chi = alpha + constant_field(g, shift);
  return cal;
}

PointwiseForms evaluate_forms(const HermitianField& field) {
  PointwiseForms f;
  f.eigenvalues = pointwise_eigenvalues(field);
  f.phase = pointwise_phase(f.eigenvalues);
  f.volume = volume_ratios(f.eigenvalues);
  return f;
}

PointwiseForms evaluate_forms(const CalibrationData& cal, const Potential& phi) {
  return evaluate_forms(alpha_phi(cal.alpha, phi));
}

Membership membership(const CalibrationData& cal, const PointwiseForms& forms, double c) {
  const Eigen::VectorXd& q = forms.phase.q;
  const double margin = std::min((q.array() - c).minCoeff(), (cal.Theta0 - q.array()).minCoeff());
  return {margin > 0.0, margin};
}

Membership membership(const CalibrationData& cal, const Potential& phi, double c) {
  return membership(cal, evaluate_forms(cal, phi), c);
}

double hc_positivity_slack(const CalibrationData& cal, const PointwiseForms& forms, double c) {
  const double floor = std::min(std::sin(c), std::cos(cal.theta0));
  return forms.phase.q.array().sin().minCoeff() - floor;
}

double j_eps(const CalibrationData& cal, const Potential& phi, double eps, int nodes) {
  const double shift = cal.cot_theta0 + cal.a0 * eps;
  return -path_integral(cal, phi, nodes, [&](const PointwiseForms& f) {
    return Eigen::VectorXd((f.volume.re.array() + eps - shift * f.volume.im.array()).matrix());
  });
}

double j0(const CalibrationData& cal, const Potential& phi, int nodes) {
  return j_eps(cal, phi, 0.0, nodes);
}

double j(const CalibrationData& cal, const Potential& phi, int nodes) {
  const Complex rot = std::polar(1.0, -cal.theta0_hat);
  return -path_integral(cal, phi, nodes, [&](const PointwiseForms& f) {
    const Eigen::Index count = f.eigenvalues.cols();
    Eigen::VectorXd out(count);
    for (Eigen::Index p = 0; p < count; ++p) {
      Complex prod = rot;
      for (Eigen::Index k = 0; k < f.eigenvalues.rows(); ++k) {
        prod *= Complex{1.0, f.eigenvalues(k, p)};
      }
      out[p] = prod.imag();
    }
    return out;
  });
}

double j_eps_split(const CalibrationData& cal, const Potential& phi, double eps, int nodes) {
  const double twist = path_integral(cal, phi, nodes, [&](const PointwiseForms& f) {
    return Eigen::VectorXd((cal.a0 * f.volume.im.array() - 1.0).matrix());
  });
  return j0(cal, phi, nodes) + eps * twist;
}

double im_z(const CalibrationData& cal, const Potential& phi, int nodes) {
  return -path_integral(cal, phi, nodes, [](const PointwiseForms& f) { return f.volume.im; });
}

EnergyPair j_eps_and_im_z(const CalibrationData& cal, const Potential& phi, double eps,
                          int nodes) {
  require_nodes(nodes);
  if (!(phi.grid() == cal.grid())) throw InvalidInput("potential and class live on different grids");
  const double shift = cal.cot_theta0 + cal.a0 * eps;
  const GaussRule rule = gauss_legendre(nodes);
  EnergyPair out;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = rule.nodes[k];
    const PointwiseForms f = evaluate_forms(cal, phi * t);
    check_path(cal, f, t);
    const Eigen::VectorXd je = (f.volume.re.array() + eps - shift * f.volume.im.array()).matrix();
    out.j_eps -= rule.weights[k] * integrate(phi.values().cwiseProduct(je), cal.grid());
    out.im_z -= rule.weights[k] * integrate(phi.values().cwiseProduct(f.volume.im), cal.grid());
  }
  return out;
}

double coercivity_gap(const CalibrationData& cal, const Potential& phi, double delta,
                      double big_c, int nodes) {
  const CoercivenessTerms terms = coerciveness_terms(cal, phi, nodes);
  return j(cal, phi, nodes) - delta * terms.endpoint + big_c;
}

double s_im_control_ratio(const CalibrationData& cal, const Potential& phi, double s) {
  if (!(s >= 0.5 && s <= 1.0)) throw InvalidInput("s must lie in [1/2, 1]");
  const PointwiseForms full = evaluate_forms(cal, phi);
  check_path(cal, full, 1.0);
  const PointwiseForms scaled = evaluate_forms(cal, phi * s);
  check_path(cal, scaled, s);
  return scaled.volume.im.cwiseQuotient(full.volume.im).minCoeff();
}

CoercivenessTerms coerciveness_terms(const CalibrationData& cal, const Potential& phi,
                                     int nodes) {
  CoercivenessTerms out;
  out.path = -path_integral(cal, phi, nodes, [&](const PointwiseForms& f) {
    return Eigen::VectorXd((cal.a0 * f.volume.im.array() - 1.0).matrix());
  });
  const PointwiseForms end = evaluate_forms(cal, phi);
  const PointwiseForms base = evaluate_forms(cal.alpha);
  const Eigen::VectorXd diff = end.volume.im - base.volume.im;
  out.endpoint = -integrate(phi.values().cwiseProduct(diff), cal.grid());
  return out;
}

double calibrate_coerciveness_constant(const std::vector<CoercivenessTerms>& samples,
                                       double a0) {
  double c = 0.0;
  for (const CoercivenessTerms& s : samples) {
    double bound;
    if (s.endpoint <= 0.0) {
      bound = -s.path;
    } else {
      // C^2 + path C - a0 endpoint >= 0
      bound = 0.5 * (-s.path + std::sqrt(s.path * s.path + 4.0 * a0 * s.endpoint));
    }
    c = std::max(c, bound);
  }
  return c;
}

}  // namespace dhym
