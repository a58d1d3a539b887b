#include "dhym/torus.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dhym/error.hpp"
#include "dhym/numerics.hpp"

namespace dhym {

namespace {

using Offset = std::array<int, 2 * kMaxComplexDim>;

// Sparse stencil keyed by offset; used only while building tap lists.
using TapMap = std::map<Offset, Complex>;

// Above this size the grid products switch to polar accumulation.
constexpr double kCartesianLimit = 1e50;

void add_second_difference(TapMap& taps, int a, int b, Complex coef, double h,
                           Stencil stencil) {
  if (a == b) {
    Offset o{};
    if (stencil == Stencil::compact) {
      const double w = 1.0 / (h * h);
      o[a] = 1;
      taps[o] += coef * w;
      o[a] = -1;
      taps[o] += coef * w;
      o[a] = 0;
      taps[o] += coef * (-2.0 * w);
    } else {
      const double w = 1.0 / (4.0 * h * h);
      o[a] = 2;
      taps[o] += coef * w;
      o[a] = -2;
      taps[o] += coef * w;
      o[a] = 0;
      taps[o] += coef * (-2.0 * w);
    }
    return;
  }
  const double w = 1.0 / (4.0 * h * h);
  for (int sa : {1, -1}) {
    for (int sb : {1, -1}) {
      Offset o{};
      o[a] = sa;
      o[b] = sb;
      taps[o] += coef * (w * sa * sb);
    }
  }
}

std::vector<StencilTap> to_taps(const TapMap& m) {
  std::vector<StencilTap> out;
  for (const auto& [off, c] : m) {
    if (std::abs(c) == 0.0) continue;
    out.push_back({off, c});
  }
  return out;
}

}  // namespace

std::string to_string(Stencil s) {
  return s == Stencil::compact ? "compact" : "conservative";
}

Stencil stencil_from_string(const std::string& name) {
  if (name == "conservative") return Stencil::conservative;
  if (name == "compact") return Stencil::compact;
  throw InvalidInput("unknown stencil '" + name + "'");
}

TorusGrid::TorusGrid(int n, int N, double L, Stencil stencil)
    : n_(n), N_(N), L_(L), stencil_(stencil) {
  if (n < 1 || n > kMaxComplexDim) throw InvalidInput("complex dimension must be in [1, 3]");
  if (N < 8 || N % 2 != 0) throw InvalidInput("points per axis must be even and >= 8");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidInput("period must be positive");
  size_ = 1;
  for (int a = 0; a < 2 * n; ++a) {
    stride_[static_cast<std::size_t>(a)] = size_;
    size_ *= static_cast<std::size_t>(N);
  }

  const double hh = h();
  const Complex I{0.0, 1.0};
  auto taps = std::make_shared<Taps>();
  taps->hessian.resize(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // d_i dbar_j = 1/4 [dx_i dx_j + dy_i dy_j + i (dx_i dy_j - dy_i dx_j)]
      TapMap m;
      const int xi = 2 * i, yi = 2 * i + 1, xj = 2 * j, yj = 2 * j + 1;
      add_second_difference(m, xi, xj, 0.25, hh, stencil);
      add_second_difference(m, yi, yj, 0.25, hh, stencil);
      if (i != j) {
        add_second_difference(m, xi, yj, 0.25 * I, hh, stencil);
        add_second_difference(m, yi, xj, -0.25 * I, hh, stencil);
      }
      taps->hessian[static_cast<std::size_t>(i * n + j)] = to_taps(m);
    }
  }
  taps->gradient.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    TapMap m;
    const double w = 1.0 / (2.0 * hh);
    Offset o{};
    o[2 * i] = 1;
    m[o] += 0.5 * w;
    o[2 * i] = -1;
    m[o] -= 0.5 * w;
    o = Offset{};
    o[2 * i + 1] = 1;
    m[o] += -0.5 * I * w;
    o[2 * i + 1] = -1;
    m[o] -= -0.5 * I * w;
    taps->gradient[static_cast<std::size_t>(i)] = to_taps(m);
  }
  taps_ = std::move(taps);
}

double TorusGrid::volume() const noexcept { return std::pow(L_, 2 * n_); }

double TorusGrid::cell_volume() const noexcept { return std::pow(h(), 2 * n_); }

std::array<int, 2 * kMaxComplexDim> TorusGrid::coords(std::size_t idx) const {
  Offset c{};
  for (int a = 0; a < 2 * n_; ++a) {
    c[static_cast<std::size_t>(a)] = static_cast<int>(idx % static_cast<std::size_t>(N_));
    idx /= static_cast<std::size_t>(N_);
  }
  return c;
}

std::size_t TorusGrid::index(const std::array<int, 2 * kMaxComplexDim>& c) const {
  std::size_t idx = 0;
  for (int a = 0; a < 2 * n_; ++a) {
    int v = c[static_cast<std::size_t>(a)] % N_;
    if (v < 0) v += N_;
    idx += static_cast<std::size_t>(v) * stride_[static_cast<std::size_t>(a)];
  }
  return idx;
}

std::size_t TorusGrid::shift(std::size_t idx,
                             const std::array<int, 2 * kMaxComplexDim>& offset) const {
  Offset c = coords(idx);
  for (int a = 0; a < 2 * n_; ++a) c[static_cast<std::size_t>(a)] += offset[static_cast<std::size_t>(a)];
  return index(c);
}

double TorusGrid::coordinate(std::size_t idx, int axis) const {
  return coords(idx)[static_cast<std::size_t>(axis)] * h();
}

const std::vector<StencilTap>& TorusGrid::hessian_taps(int i, int j) const {
  return taps_->hessian[static_cast<std::size_t>(i * n_ + j)];
}

const std::vector<StencilTap>& TorusGrid::gradient_taps(int i) const {
  return taps_->gradient[static_cast<std::size_t>(i)];
}

// ---------------------------------------------------------------------------

Potential::Potential(TorusGrid grid)
    : grid_(std::move(grid)),
      values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_.size()))) {}

Potential::Potential(TorusGrid grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_.size()) {
    throw InvalidInput("potential size does not match grid");
  }
  if (!values_.allFinite()) throw InvalidInput("potential values must be finite");
}

double Potential::mean() const {
  return pairwise_sum({values_.data(), static_cast<std::size_t>(values_.size())}) /
         static_cast<double>(values_.size());
}

Potential Potential::operator+(const Potential& o) const {
  if (!(grid_ == o.grid_)) throw InvalidInput("grid mismatch");
  return Potential(grid_, values_ + o.values_);
}

Potential Potential::operator-(const Potential& o) const {
  if (!(grid_ == o.grid_)) throw InvalidInput("grid mismatch");
  return Potential(grid_, values_ - o.values_);
}

Potential Potential::operator*(double s) const { return Potential(grid_, values_ * s); }

Potential& Potential::operator+=(const Potential& o) {
  if (!(grid_ == o.grid_)) throw InvalidInput("grid mismatch");
  values_ += o.values_;
  return *this;
}

Potential Potential::plus_constant(double c) const {
  return Potential(grid_, (values_.array() + c).matrix());
}

// ---------------------------------------------------------------------------

HermitianField::HermitianField(TorusGrid grid)
    : grid_(std::move(grid)),
      data_(grid_.size() * static_cast<std::size_t>(grid_.n() * grid_.n()), Complex{}) {}

Eigen::Map<CMatrix> HermitianField::at(std::size_t idx) {
  const int n = grid_.n();
  return {data_.data() + idx * static_cast<std::size_t>(n * n), n, n};
}

Eigen::Map<const CMatrix> HermitianField::at(std::size_t idx) const {
  const int n = grid_.n();
  return {data_.data() + idx * static_cast<std::size_t>(n * n), n, n};
}

HermitianField HermitianField::operator+(const HermitianField& o) const {
  if (!(grid_ == o.grid_)) throw InvalidInput("field grid mismatch");
  HermitianField out(grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] + o.data_[k];
  return out;
}

HermitianField HermitianField::operator*(double s) const {
  HermitianField out(grid_);
  for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = s * data_[k];
  return out;
}

double HermitianField::hermitian_residual() const {
  double worst = 0.0;
  for (std::size_t p = 0; p < size(); ++p) {
    const auto m = at(p);
    worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
  }
  return worst;
}

HermitianField constant_field(const TorusGrid& grid, const CMatrix& m) {
  if (m.rows() != grid.n() || m.cols() != grid.n()) {
    throw InvalidInput("constant form has wrong dimension");
  }
  if ((m - m.adjoint()).norm() > 1e-12 * std::max(1.0, m.norm())) {
    throw InvalidInput("constant form is not Hermitian");
  }
  HermitianField f(grid);
  const CMatrix sym = 0.5 * (m + m.adjoint());
  for (std::size_t p = 0; p < grid.size(); ++p) f.at(p) = sym;
  return f;
}

HermitianField complex_hessian(const Potential& phi) {
  const TorusGrid& g = phi.grid();
  const int n = g.n();
  const int N = g.N();
  const int axes = g.axes();
  HermitianField out(g);
  const double* v = phi.values().data();

  std::array<std::ptrdiff_t, 2 * kMaxComplexDim> stride{};
  std::ptrdiff_t s = 1;
  for (int a = 0; a < axes; ++a) {
    stride[static_cast<std::size_t>(a)] = s;
    s *= N;
  }

  // Taps reduced to their (at most two) nonzero axes.
  struct Sparse {
    int axis[2];
    int off[2];
    int count;
    Complex coef;
  };
  struct Entry {
    int i, j;
    std::vector<Sparse> taps;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Entry e{i, j, {}};
      for (const StencilTap& t : g.hessian_taps(i, j)) {
        Sparse sp{{0, 0}, {0, 0}, 0, t.coef};
        for (int a = 0; a < axes; ++a) {
          const int o = t.offset[static_cast<std::size_t>(a)];
          if (o == 0) continue;
          sp.axis[sp.count] = a;
          sp.off[sp.count] = o;
          ++sp.count;
        }
        e.taps.push_back(sp);
      }
      entries.push_back(std::move(e));
    }
  }

  std::array<int, 2 * kMaxComplexDim> c{};
  for (std::size_t p = 0; p < g.size(); ++p) {
    if (p > 0) {
      // odometer increment of the coordinates
      for (int a = 0; a < axes; ++a) {
        if (++c[static_cast<std::size_t>(a)] < N) break;
        c[static_cast<std::size_t>(a)] = 0;
      }
    }
    auto m = out.at(p);
    for (const Entry& e : entries) {
      Complex acc{};
      for (const Sparse& t : e.taps) {
        std::ptrdiff_t q = static_cast<std::ptrdiff_t>(p);
        for (int k = 0; k < t.count; ++k) {
          const auto a = static_cast<std::size_t>(t.axis[k]);
          int ca = c[a] + t.off[k];
          if (ca >= N) ca -= N;
          else if (ca < 0) ca += N;
          q += static_cast<std::ptrdiff_t>(ca - c[a]) * stride[a];
        }
        acc += t.coef * v[q];
      }
      if (e.i == e.j) {
        m(e.i, e.i) = Complex{acc.real(), 0.0};
      } else {
        m(e.i, e.j) = acc;
        m(e.j, e.i) = std::conj(acc);
      }
    }
  }
  return out;
}

HermitianField alpha_phi(const HermitianField& alpha, const Potential& phi) {
  if (!(alpha.grid() == phi.grid())) throw InvalidInput("alpha and phi live on different grids");
  return alpha + complex_hessian(phi);
}

Eigen::MatrixXd pointwise_eigenvalues(const HermitianField& field) {
  const int n = field.n();
  Eigen::MatrixXd eig(n, static_cast<Eigen::Index>(field.size()));
  for (std::size_t p = 0; p < field.size(); ++p) {
    const auto m = field.at(p);
    const auto col = static_cast<Eigen::Index>(p);
    if (n == 1) {
      eig(0, col) = m(0, 0).real();
    } else if (n == 2) {
      const double a = m(0, 0).real();
      const double d = m(1, 1).real();
      const double mean = 0.5 * (a + d);
      const double rad = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
      eig(0, col) = mean + rad;
      eig(1, col) = mean - rad;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(Eigen::Matrix3cd(m),
                                                         Eigen::EigenvaluesOnly);
      const Eigen::Vector3d ev = es.eigenvalues();  // ascending
      for (int k = 0; k < 3; ++k) eig(k, col) = ev[2 - k];
    }
  }
  return eig;
}

PhaseFields pointwise_phase(const Eigen::MatrixXd& eigenvalues) {
  const Eigen::Index count = eigenvalues.cols();
  PhaseFields out{Eigen::VectorXd(count), Eigen::VectorXd(count), Eigen::VectorXd(count)};
  for (Eigen::Index p = 0; p < count; ++p) {
    std::span<const double> lam(eigenvalues.col(p).data(),
                                static_cast<std::size_t>(eigenvalues.rows()));
    out.q[p] = phase_q(lam);
    out.p[p] = out.q[p] - arccot(lam[0]);
    out.min_eigenvalue[p] = lam[lam.size() - 1];
  }
  return out;
}

PhaseFields pointwise_phase(const HermitianField& field) {
  return pointwise_phase(pointwise_eigenvalues(field));
}

VolumeRatios VolumeRatios::rotated(double angle) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  VolumeRatios out;
  out.re = c * re + s * im;
  out.im = c * im - s * re;
  out.singular = singular;
  return out;
}

std::size_t VolumeRatios::singular_count() const {
  return static_cast<std::size_t>(std::count(singular.begin(), singular.end(), 1));
}

VolumeRatios volume_ratios(const Eigen::MatrixXd& eigenvalues) {
  const Eigen::Index count = eigenvalues.cols();
  const Eigen::Index n = eigenvalues.rows();
  VolumeRatios out{Eigen::VectorXd(count), Eigen::VectorXd(count),
                   std::vector<std::uint8_t>(static_cast<std::size_t>(count), 0)};
  for (Eigen::Index p = 0; p < count; ++p) {
    const double* lam = eigenvalues.col(p).data();
    bool moderate = true;
    for (Eigen::Index k = 0; k < n; ++k) moderate = moderate && std::abs(lam[k]) <= kCartesianLimit;
    ReIm ri;
    if (moderate) {
      // Direct product; no overflow possible below the limit.
      Complex prod{1.0, 0.0};
      for (Eigen::Index k = 0; k < n; ++k) prod *= Complex{lam[k], 1.0};
      ri = {prod.real(), prod.imag()};
    } else {
      ri = polar_product({lam, static_cast<std::size_t>(n)}).cartesian();
    }
    out.re[p] = ri.re;
    out.im[p] = ri.im;
    out.singular[static_cast<std::size_t>(p)] = ri.im <= 1e-12 * std::hypot(ri.re, ri.im) ? 1 : 0;
  }
  return out;
}

VolumeRatios volume_ratios(const HermitianField& field) {
  return volume_ratios(pointwise_eigenvalues(field));
}

double integrate(const Eigen::VectorXd& density, const TorusGrid& grid) {
  if (static_cast<std::size_t>(density.size()) != grid.size()) {
    throw InvalidInput("density size does not match grid");
  }
  return grid.cell_volume() *
         pairwise_sum({density.data(), static_cast<std::size_t>(density.size())});
}

Potential trig_potential(const TorusGrid& grid, std::span<const TrigTerm> terms) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  const double k0 = 2.0 * std::numbers::pi / grid.N();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto c = grid.coords(p);
    double acc = 0.0;
    for (const TrigTerm& t : terms) {
      double arg = t.phase;
      for (int a = 0; a < grid.axes(); ++a) {
        arg += k0 * t.wave[static_cast<std::size_t>(a)] * c[static_cast<std::size_t>(a)];
      }
      acc += t.amplitude * std::cos(arg);
    }
    v[static_cast<Eigen::Index>(p)] = acc;
  }
  return Potential(grid, std::move(v));
}

Potential bump_potential(const TorusGrid& grid, std::span<const PeriodicBump> bumps) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  const double w0 = 2.0 * std::numbers::pi / grid.L();
  for (const PeriodicBump& b : bumps) {
    if (!(b.width > 0.0)) throw InvalidInput("bump width must be positive");
  }
  for (std::size_t p = 0; p < grid.size(); ++p) {
    double acc = 0.0;
    for (const PeriodicBump& b : bumps) {
      const double kappa = 1.0 / ((w0 * b.width) * (w0 * b.width));
      double e = 0.0;
      for (int a = 0; a < grid.axes(); ++a) {
        const double x = grid.coordinate(p, a) - b.center[static_cast<std::size_t>(a)];
        e += std::cos(w0 * x) - 1.0;
      }
      acc += b.amplitude * std::exp(kappa * e);
    }
    v[static_cast<Eigen::Index>(p)] = acc;
  }
  return Potential(grid, std::move(v));
}

}  // namespace dhym
