#include "dhym/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dhym/error.hpp"

namespace dhym {

namespace {

// d_{z_i} f at every point, flattened as point * n + i.
std::vector<Complex> apply_gradient(const Potential& f) {
  const TorusGrid& g = f.grid();
  const int n = g.n();
  std::vector<Complex> out(g.size() * static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < g.size(); ++p) {
    for (int i = 0; i < n; ++i) {
      Complex acc{};
      for (const StencilTap& t : g.gradient_taps(i)) acc += t.coef * f[g.shift(p, t.offset)];
      out[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = acc;
    }
  }
  return out;
}

struct SliceData {
  HermitianField a;
  Eigen::VectorXd phi_t;
  Eigen::VectorXd phi_tt;
  std::vector<Complex> grad_phi_t;
};

SliceData slice_data(const CalibrationData& cal, const PathPotential& path, int k) {
  const double dt = path.dt();
  const Eigen::VectorXd& lo = path.slice(k - 1).values();
  const Eigen::VectorXd& mid = path.slice(k).values();
  const Eigen::VectorXd& hi = path.slice(k + 1).values();
  SliceData d{alpha_phi(cal.alpha, path.slice(k)), (hi - lo) / (2.0 * dt),
              (hi - 2.0 * mid + lo) / (dt * dt), {}};
  d.grad_phi_t = apply_gradient(Potential(path.grid(), d.phi_t));
  return d;
}

struct LiftScale {
  double kappa;  // multiplies phi_tt
  double w;      // multiplies d_{z_i} phi_t
};

LiftScale lift_scale(double t, double eps) {
  return {std::exp(2.0 * t) / (4.0 * eps * eps), -std::exp(t) / (2.0 * eps)};
}

CMatrix build_lifted(const SliceData& d, std::size_t p, const LiftScale& s) {
  const auto a = d.a.at(p);
  const Eigen::Index n = a.rows();
  CMatrix m(n + 1, n + 1);
  m.topLeftCorner(n, n) = a;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex w = s.w * d.grad_phi_t[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
    m(i, n) = w;
    m(n, i) = std::conj(w);
  }
  m(n, n) = s.kappa * d.phi_tt[static_cast<Eigen::Index>(p)];
  return m;
}

struct Assembly {
  // phase residual Qhat(M) - theta0_hat
  Eigen::VectorXd g;
  // residual of the determinant form divided by its phi_tt coefficient
  Eigen::VectorXd r;
  bool cone_exit = false;
  std::vector<Eigen::Triplet<double>> triplets;
};

Assembly assemble(const CalibrationData& cal, const PathPotential& path, double eps,
                  bool jacobian) {
  const TorusGrid& grid = path.grid();
  const int M = path.slices();
  const std::size_t P = grid.size();
  const int n = grid.n();
  const double dt = path.dt();
  const Complex rot = std::polar(1.0, -cal.theta0_hat);
  Assembly out;
  const auto rows = static_cast<Eigen::Index>(static_cast<std::size_t>(M - 1) * P);
  out.g.resize(rows);
  out.r.resize(rows);
  if (jacobian) out.triplets.reserve(static_cast<std::size_t>(rows) * 24);

  auto col = [P](int k, std::size_t x) {
    return static_cast<int>(static_cast<std::size_t>(k - 1) * P + x);
  };

  Eigen::SelfAdjointEigenSolver<CMatrix> es(n + 1);
  for (int k = 1; k < M; ++k) {
    const SliceData d = slice_data(cal, path, k);
    const LiftScale s = lift_scale(path.time(k), eps);
    const double c3 = 4.0 * eps * eps * std::exp(-2.0 * path.time(k));
    for (std::size_t x = 0; x < P; ++x) {
      const CMatrix m = build_lifted(d, x, s);
      es.compute(m, jacobian ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
      const Eigen::VectorXd& mu = es.eigenvalues();
      double qhat = 0.0;
      Complex lifted = rot;
      for (Eigen::Index i = 0; i <= n; ++i) {
        qhat += std::atan(mu[i]);
        lifted *= Complex{1.0, mu[i]};
      }
      const Complex det = (CMatrix::Identity(n, n) + Complex{0.0, 1.0} * CMatrix(d.a.at(x)))
                              .determinant();
      const double lead = (rot * det).real();
      const double g = qhat - cal.theta0_hat;
      if (!(std::abs(g) < std::numbers::pi / 2.0) || !(lead > 0.0)) out.cone_exit = true;
      const int row = col(k, x);
      out.g[row] = g;
      out.r[row] = c3 * lifted.imag() / lead;
      if (!jacobian) continue;

      // dQhat = Re tr(W dM), W = (I + M^2)^{-1}, scaled by the same positive factor
      const double scale = c3 * std::abs(lifted) / lead;
      const Eigen::VectorXd inv = (scale / (1.0 + mu.array().square())).matrix();
      const CMatrix W = es.eigenvectors() * inv.cast<Complex>().asDiagonal() *
                        es.eigenvectors().adjoint();
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          const Complex wji = W(j, i);
          for (const StencilTap& tap : grid.hessian_taps(i, j)) {
            const double v = i == j ? wji.real() * tap.coef.real()
                                    : 2.0 * (wji * tap.coef).real();
            out.triplets.emplace_back(row, col(k, grid.shift(x, tap.offset)), v);
          }
        }
      }
      const double wnn = W(n, n).real();
      out.triplets.emplace_back(row, row, -2.0 * wnn * s.kappa / (dt * dt));
      for (int side : {-1, 1}) {
        const int kk = k + side;
        if (kk < 1 || kk >= M) continue;
        out.triplets.emplace_back(row, col(kk, x), wnn * s.kappa / (dt * dt));
        for (int i = 0; i < n; ++i) {
          const Complex wni = W(n, i);
          for (const StencilTap& tap : grid.gradient_taps(i)) {
            const Complex dw = s.w * (side / (2.0 * dt)) * tap.coef;
            out.triplets.emplace_back(row, col(kk, grid.shift(x, tap.offset)),
                                      2.0 * (wni * dw).real());
          }
        }
      }
    }
  }
  return out;
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

PathPotential::PathPotential(const Potential& phi0, const Potential& phi1, int slices) {
  if (!(phi0.grid() == phi1.grid())) throw InvalidInput("endpoints live on different grids");
  if (slices < 2) throw InvalidInput("a path needs at least 2 slices");
  slices_.reserve(static_cast<std::size_t>(slices) + 1);
  slices_.push_back(phi0);
  for (int k = 1; k < slices; ++k) {
    const double t = static_cast<double>(k) / slices;
    slices_.emplace_back(phi0.grid(), (1.0 - t) * phi0.values() + t * phi1.values());
  }
  slices_.push_back(phi1);
}

Potential& PathPotential::interior(int k) {
  if (k < 1 || k >= slices()) throw InvalidInput("endpoint slices are pinned");
  return slices_[static_cast<std::size_t>(k)];
}

Eigen::VectorXd PathPotential::interior_vector() const {
  const auto P = static_cast<Eigen::Index>(grid().size());
  Eigen::VectorXd v((slices() - 1) * P);
  for (int k = 1; k < slices(); ++k) v.segment((k - 1) * P, P) = slice(k).values();
  return v;
}

void PathPotential::set_interior(const Eigen::VectorXd& v) {
  const auto P = static_cast<Eigen::Index>(grid().size());
  if (v.size() != (slices() - 1) * P) throw InvalidInput("interior vector has wrong size");
  for (int k = 1; k < slices(); ++k) interior(k).values() = v.segment((k - 1) * P, P);
}

CMatrix lifted_matrix(const CalibrationData& cal, const PathPotential& path, double eps, int k,
                      std::size_t point) {
  if (k < 1 || k >= path.slices()) throw InvalidInput("lifted matrix needs an interior slice");
  if (point >= path.grid().size()) throw InvalidInput("point index out of range");
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  return build_lifted(slice_data(cal, path, k), point, lift_scale(path.time(k), eps));
}

GeodesicReport inspect_path(const CalibrationData& cal, const PathPotential& path, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("eps must be positive");
  const TorusGrid& grid = path.grid();
  const int M = path.slices();
  const int n = grid.n();
  const std::size_t P = grid.size();
  const Complex rot = std::polar(1.0, -cal.theta0_hat);

  GeodesicReport r;
  r.eps = eps;
  r.slices = M;
  r.min_phi_tt = std::numeric_limits<double>::infinity();
  r.path_margin = std::numeric_limits<double>::infinity();
  double max_res = 0.0, max_scale = 0.0, max_id = 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(n + 1);
  for (int k = 1; k < M; ++k) {
    const SliceData d = slice_data(cal, path, k);
    const double t = path.time(k);
    const LiftScale s = lift_scale(t, eps);
    const double c3 = 4.0 * eps * eps * std::exp(-2.0 * t);
    for (std::size_t x = 0; x < P; ++x) {
      es.compute(build_lifted(d, x, s), Eigen::EigenvaluesOnly);
      Complex lifted = rot;
      double qhat = 0.0;
      for (Eigen::Index i = 0; i <= n; ++i) {
        const double mu = es.eigenvalues()[i];
        lifted *= Complex{1.0, mu};
        qhat += std::atan(mu);
      }
      r.residual = std::max(r.residual, std::abs(qhat - cal.theta0_hat));

      const CMatrix X = CMatrix::Identity(n, n) + Complex{0.0, 1.0} * CMatrix(d.a.at(x));
      const Eigen::PartialPivLU<CMatrix> lu(X);
      const Complex det = lu.determinant();
      const Eigen::Map<const Eigen::VectorXcd> v(&d.grad_phi_t[x * static_cast<std::size_t>(n)], n);
      const Complex quad = det * v.dot(lu.solve(Eigen::VectorXcd(v)));
      const double phi_tt = d.phi_tt[static_cast<Eigen::Index>(x)];
      const double t1 = phi_tt * (rot * det).real();
      const double t2 = (rot * quad).imag();
      const double t3 = c3 * (rot * det).imag();
      max_res = std::max(max_res, std::abs(t1 + t2 + t3));
      max_scale = std::max(max_scale, std::abs(t1) + std::abs(t2) + std::abs(t3));
      max_id = std::max(max_id, std::abs(t1 + t2 + t3 - c3 * lifted.imag()));
      r.min_phi_tt = std::min(r.min_phi_tt, phi_tt);
    }
  }
  const double scale = max_scale > 0.0 ? max_scale : 1.0;
  r.eqn_residual = max_res / scale;
  r.identity_residual = max_id / scale;
  if (M < 2 || !std::isfinite(r.min_phi_tt)) r.min_phi_tt = 0.0;
  for (int k = 0; k < M; ++k) {
    const Eigen::VectorXd pt = (path.slice(k + 1).values() - path.slice(k).values()) / path.dt();
    r.max_phi_t = std::max(r.max_phi_t, sup_norm(pt));
  }
  for (int k = 0; k <= M; ++k) {
    r.path_margin = std::min(r.path_margin, membership(cal, path.slice(k), 0.0).margin);
  }
  return r;
}

GeodesicSolution solve_eps_geodesic(const CalibrationData& cal, const Potential& phi0,
                                    const Potential& phi1, const GeodesicConfig& config) {
  if (!(config.eps > 0.0)) throw InvalidInput("eps must be positive");
  if (!(config.tol > 0.0)) throw InvalidInput("tolerance must be positive");
  if (!(config.initial_ds > 0.0)) throw InvalidInput("initial pseudo-time step must be positive");
  if (!(phi0.grid() == cal.grid())) throw InvalidInput("endpoints and class live on different grids");
  PathPotential path(phi0, phi1, config.slices);
  for (int k = 0; k <= path.slices(); ++k) {
    const Membership m = membership(cal, path.slice(k), 0.0);
    if (!m.inside) {
      std::ostringstream os;
      os << "linear interpolation leaves H at t = " << path.time(k) << " (margin " << m.margin
         << ")";
      throw PathExit(os.str(), path.time(k));
    }
  }

  Assembly cur = assemble(cal, path, config.eps, true);
  if (cur.cone_exit) throw ConeExit("initial path leaves the lifted cone", -1, 0.0);
  double res = sup_norm(cur.g);
  double rnorm = sup_norm(cur.r);
  double ds = config.initial_ds;
  int iterations = 0;
  int rejections = 0;
  const auto unknowns = cur.g.size();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;

  while (res >= config.tol && iterations < config.max_iterations) {
    ++iterations;
    Eigen::SparseMatrix<double> jac(unknowns, unknowns);
    jac.setFromTriplets(cur.triplets.begin(), cur.triplets.end());
    Eigen::SparseMatrix<double> id(unknowns, unknowns);
    id.setIdentity();
    bool accepted = false;
    while (!accepted) {
      Eigen::SparseMatrix<double> a = id * (1.0 / ds) - jac;
      a.makeCompressed();
      if (!analyzed) {
        lu.analyzePattern(a);
        analyzed = true;
      }
      lu.factorize(a);
      if (lu.info() != Eigen::Success) throw NonConvergence("geodesic linear solve failed");
      const Eigen::VectorXd delta = lu.solve(cur.r);

      PathPotential trial = path;
      trial.set_interior(path.interior_vector() + delta);
      Assembly next = assemble(cal, trial, config.eps, true);
      const double next_res = sup_norm(next.g);
      const double next_rnorm = sup_norm(next.r);
      if (!next.cone_exit && std::isfinite(next_rnorm) && next_rnorm < 2.0 * rnorm) {
        ds = std::min(config.max_ds, ds * std::clamp(rnorm / next_rnorm, 0.5, 10.0));
        rnorm = next_rnorm;
        path = std::move(trial);
        cur = std::move(next);
        res = next_res;
        accepted = true;
      } else {
        ds *= 0.25;
        ++rejections;
        if (ds < 1e-14) throw NonConvergence("geodesic pseudo-time step underflow");
      }
    }
  }

  GeodesicReport report = inspect_path(cal, path, config.eps);
  report.converged = res < config.tol;
  report.iterations = iterations;
  report.rejections = rejections;
  if (!report.converged) {
    std::ostringstream os;
    os << "geodesic relaxation stopped at residual " << res << " after " << iterations
       << " iterations";
    throw NonConvergence(os.str());
  }
  return {std::move(path), report};
}

double EnergyProfile::spread_delta() const {
  if (e_p_delta.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(e_p_delta.begin(), e_p_delta.end());
  return *hi - *lo;
}

EnergyProfile energy_profile(const CalibrationData& cal, const PathPotential& path, double p,
                             double delta) {
  if (!(p >= 1.0)) throw InvalidInput("p must be >= 1");
  if (!(delta >= 0.0)) throw InvalidInput("delta must be >= 0");
  const TorusGrid& grid = path.grid();
  EnergyProfile out;
  for (int k = 0; k < path.slices(); ++k) {
    const Eigen::VectorXd& a = path.slice(k).values();
    const Eigen::VectorXd& b = path.slice(k + 1).values();
    const Eigen::VectorXd phi_t = (b - a) / path.dt();
    const Potential mid(grid, 0.5 * (a + b));
    const PointwiseForms f = evaluate_forms(cal, mid);
    const Membership m = membership(cal, f, 0.0);
    if (!m.inside) {
      std::ostringstream os;
      os << "path leaves H near t = " << path.time(k) << " (margin " << m.margin << ")";
      throw ConeExit(os.str(), -1, m.margin);
    }
    const Eigen::VectorXd weight = f.volume.rotated(cal.theta0).re;
    const Eigen::ArrayXd pw = phi_t.array().abs().pow(p);
    out.t.push_back(path.time(k) + 0.5 * path.dt());
    out.e_p.push_back(integrate((pw * weight.array()).matrix(), grid));
    const Eigen::ArrayXd smooth = (pw.square() + delta * delta).sqrt();
    out.e_p_delta.push_back(integrate((smooth * weight.array()).matrix(), grid));
  }
  return out;
}

double length_p(const CalibrationData& cal, const PathPotential& path, double p) {
  const EnergyProfile e = energy_profile(cal, path, p, 0.0);
  double total = 0.0;
  for (double v : e.e_p) total += path.dt() * std::pow(std::max(v, 0.0), 1.0 / p);
  return total;
}

DpEstimate estimate_dp(const CalibrationData& cal, const Potential& phi0, const Potential& phi1,
                       double p, const std::vector<double>& schedule, GeodesicConfig config) {
  if (schedule.empty()) throw InvalidInput("eps schedule is empty");
  DpEstimate out;
  for (double e : schedule) {
    config.eps = e;
    GeodesicSolution sol = solve_eps_geodesic(cal, phi0, phi1, config);
    out.eps.push_back(e);
    out.lengths.push_back(length_p(cal, sol.path, p));
    out.reports.push_back(sol.report);
  }
  out.extrapolated = extrapolate_eps2(out.eps, out.lengths);
  return out;
}

double extrapolate_eps2(std::span<const double> eps, std::span<const double> values) {
  if (eps.empty() || eps.size() != values.size()) throw InvalidInput("extrapolation needs matching, nonempty inputs");
  const std::size_t m = values.size();
  if (m == 1) return values[0];
  const double e1 = eps[m - 2] * eps[m - 2];
  const double e2 = eps[m - 1] * eps[m - 1];
  if (e1 == e2) throw InvalidInput("extrapolation needs distinct eps");
  return (e1 * values[m - 1] - e2 * values[m - 2]) / (e1 - e2);
}

DpLowerBound dp_lower_bound(const CalibrationData& cal, const Potential& phi0,
                            const Potential& phi1, double p) {
  if (!(phi0.grid() == phi1.grid())) throw InvalidInput("endpoints live on different grids");
  const Eigen::VectorXd w0 = evaluate_forms(cal, phi0).volume.rotated(cal.theta0).re;
  const Eigen::VectorXd w1 = evaluate_forms(cal, phi1).volume.rotated(cal.theta0).re;
  const Eigen::ArrayXd diff = phi0.values().array() - phi1.values().array();
  const Eigen::ArrayXd above = diff.max(0.0).pow(p);
  const Eigen::ArrayXd below = (-diff).max(0.0).pow(p);
  return {integrate((above * w0.array()).matrix(), phi0.grid()),
          integrate((below * w1.array()).matrix(), phi0.grid())};
}

}  // namespace dhym
