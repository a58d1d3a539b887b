#include "config.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <set>

#include "dhym/error.hpp"
#include "dhym/snapshot.hpp"

namespace dhym::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InvalidInput("config: " + path + ": " + msg);
}

// A json node together with its dotted path, for error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail(path_, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j_.items()) {
      if (!ok.count(key)) fail(child_path(key), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  Node at(const char* key) const { return {j_.at(key), child_path(key)}; }
  Node at(std::size_t i) const { return {j_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  std::size_t array_size() const {
    if (!j_.is_array()) fail(path_, "expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail(path_, "expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail(path_, "must be finite");
    return v;
  }

  long long integer() const {
    if (!j_.is_number_integer()) fail(path_, "expected an integer");
    return j_.get<long long>();
  }

  std::string string() const {
    if (!j_.is_string()) fail(path_, "expected a string");
    return j_.get<std::string>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail(path_, "expected true or false");
    return j_.get<bool>();
  }

  std::vector<double> numbers() const {
    std::vector<double> out(array_size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }

  [[noreturn]] void reject(const std::string& msg) const { fail(path_, msg); }

 private:
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
};

template <class T>
void read(const Node& obj, const char* key, T& out) {
  if (!obj.has(key)) return;
  const Node v = obj.at(key);
  if constexpr (std::is_same_v<T, double>) {
    out = v.number();
  } else if constexpr (std::is_same_v<T, bool>) {
    out = v.boolean();
  } else if constexpr (std::is_integral_v<T>) {
    const long long x = v.integer();
    if (x < static_cast<long long>(std::numeric_limits<T>::min()) ||
        x > static_cast<long long>(std::numeric_limits<T>::max()))
      v.reject("out of range");
    out = static_cast<T>(x);
  } else {
    out = v.string();
  }
}

std::array<int, 2 * kMaxComplexDim> read_wave(const Node& v) {
  const std::size_t m = v.array_size();
  if (m == 0 || m > 2 * kMaxComplexDim) v.reject("wave vector needs 1 to 6 entries");
  std::array<int, 2 * kMaxComplexDim> w{};
  for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<int>(v.at(i).integer());
  return w;
}

std::vector<TrigTerm> read_trig(const Node& arr) {
  std::vector<TrigTerm> out(arr.array_size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Node t = arr.at(i);
    t.expect_object({"amplitude", "wave", "phase"});
    if (!t.has("wave")) t.reject("missing 'wave'");
    read(t, "amplitude", out[i].amplitude);
    read(t, "phase", out[i].phase);
    out[i].wave = read_wave(t.at("wave"));
  }
  return out;
}

std::vector<PeriodicBump> read_bumps(const Node& arr) {
  std::vector<PeriodicBump> out(arr.array_size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Node b = arr.at(i);
    b.expect_object({"amplitude", "center", "width"});
    read(b, "amplitude", out[i].amplitude);
    read(b, "width", out[i].width);
    if (b.has("center")) {
      const std::vector<double> c = b.at("center").numbers();
      if (c.size() > 2 * kMaxComplexDim) b.at("center").reject("at most 6 coordinates");
      std::copy(c.begin(), c.end(), out[i].center.begin());
    }
  }
  return out;
}

GridSpec read_grid(const Node& g) {
  g.expect_object({"n", "N", "L", "stencil"});
  GridSpec s;
  read(g, "n", s.n);
  read(g, "N", s.N);
  read(g, "L", s.L);
  if (g.has("stencil")) {
    try {
      s.stencil = stencil_from_string(g.at("stencil").string());
    } catch (const InvalidInput& e) {
      g.at("stencil").reject(e.what());
    }
  }
  return s;
}

Complex read_entry(const Node& v) {
  if (v.raw().is_number()) return {v.number(), 0.0};
  const std::vector<double> p = v.numbers();
  if (p.size() != 2) v.reject("entry must be a number or [re, im]");
  return {p[0], p[1]};
}

AlphaSpec read_alpha(const Node& a) {
  a.expect_object({"constant", "diag", "trig"});
  AlphaSpec s;
  if (a.has("constant") == a.has("diag")) a.reject("give exactly one of 'constant' or 'diag'");
  if (a.has("diag")) {
    const std::vector<double> d = a.at("diag").numbers();
    if (d.empty()) a.at("diag").reject("empty");
    s.constant = CMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) s.constant(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
  } else {
    const Node m = a.at("constant");
    const std::size_t n = m.array_size();
    if (n == 0) m.reject("empty");
    s.constant = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const Node row = m.at(i);
      if (row.array_size() != n) row.reject("matrix must be square");
      for (std::size_t k = 0; k < n; ++k)
        s.constant(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = read_entry(row.at(k));
    }
    if ((s.constant - s.constant.adjoint()).norm() > 1e-12 * (1.0 + s.constant.norm()))
      m.reject("matrix must be Hermitian");
  }
  if (a.has("trig")) s.trig = read_trig(a.at("trig"));
  return s;
}

PotentialRecipe read_recipe(const Node& r) {
  r.expect_object({"constant", "trig", "bumps", "random_bumps", "snapshot"});
  PotentialRecipe p;
  read(r, "constant", p.constant);
  if (r.has("trig")) p.trig = read_trig(r.at("trig"));
  if (r.has("bumps")) p.bumps = read_bumps(r.at("bumps"));
  if (r.has("random_bumps")) {
    const Node rb = r.at("random_bumps");
    rb.expect_object({"count", "amplitude"});
    read(rb, "count", p.random.count);
    read(rb, "amplitude", p.random.amplitude);
    if (p.random.count < 0) rb.at("count").reject("must be >= 0");
  }
  if (r.has("snapshot")) p.snapshot = r.at("snapshot").string();
  return p;
}

void read_flow(const Node& f, FlowConfig& c) {
  f.expect_object({"eps", "dt_policy", "cfl", "dt", "t_end", "tol", "monitor_every",
                   "monitor_functionals", "functional_nodes", "snapshot_times", "max_steps"});
  read(f, "eps", c.eps);
  if (f.has("dt_policy")) {
    const std::string p = f.at("dt_policy").string();
    if (p == "cfl")
      c.policy = DtPolicy::cfl;
    else if (p == "fixed")
      c.policy = DtPolicy::fixed;
    else
      f.at("dt_policy").reject("expected 'cfl' or 'fixed'");
  }
  read(f, "cfl", c.cfl);
  read(f, "dt", c.dt);
  read(f, "t_end", c.t_end);
  read(f, "tol", c.tol);
  read(f, "monitor_every", c.monitor_every);
  read(f, "monitor_functionals", c.monitor_functionals);
  read(f, "functional_nodes", c.functional_nodes);
  read(f, "max_steps", c.max_steps);
  if (f.has("snapshot_times")) c.snapshot_times = f.at("snapshot_times").numbers();
}

void read_functional(const Node& f, FunctionalParams& p) {
  f.expect_object({"eps", "nodes", "delta", "bigC"});
  read(f, "eps", p.eps);
  read(f, "nodes", p.nodes);
  read(f, "delta", p.delta);
  read(f, "bigC", p.big_c);
}

void read_geodesic(const Node& g, GeodesicParams& p) {
  g.expect_object({"eps", "p", "slices", "tol", "max_iterations"});
  if (g.has("eps")) p.eps = g.at("eps").numbers();
  read(g, "p", p.p);
  read(g, "slices", p.slices);
  read(g, "tol", p.tol);
  read(g, "max_iterations", p.max_iterations);
}

void read_regularize(const Node& r, RegularizeParams& p) {
  r.expect_object({"radius", "eta", "per_axis", "half_width", "kappa", "band"});
  read(r, "radius", p.radius);
  read(r, "eta", p.eta);
  read(r, "per_axis", p.per_axis);
  read(r, "half_width", p.half_width);
  read(r, "kappa", p.kappa);
  read(r, "band", p.band);
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  const Node root(doc, "");
  if (!doc.is_object()) throw InvalidInput("config: top level must be an object");
  root.expect_object({"schema", "grid", "alpha", "phi0", "phi1", "flow", "functional", "geodesic",
                      "regularize", "seed", "output_dir"});
  if (!root.has("schema")) throw InvalidInput("config: schema: missing (expected \"dhymlab/1\")");
  if (root.at("schema").string() != kSchema)
    fail("schema", "unsupported schema '" + root.at("schema").string() + "', expected \"dhymlab/1\"");

  ExperimentConfig c;
  c.base_dir = base_dir;
  if (root.has("grid")) c.grid = read_grid(root.at("grid"));
  if (root.has("alpha")) c.alpha = read_alpha(root.at("alpha"));
  if (root.has("phi0")) c.phi0 = read_recipe(root.at("phi0"));
  if (root.has("phi1")) c.phi1 = read_recipe(root.at("phi1"));
  if (root.has("flow")) read_flow(root.at("flow"), c.flow);
  if (root.has("functional")) read_functional(root.at("functional"), c.functional);
  if (root.has("geodesic")) read_geodesic(root.at("geodesic"), c.geodesic);
  if (root.has("regularize")) read_regularize(root.at("regularize"), c.regularize);
  if (root.has("seed")) {
    const Node s = root.at("seed");
    if (!s.raw().is_number_unsigned()) s.reject("expected a non-negative integer");
    c.seed = s.raw().get<std::uint64_t>();
  }
  read(root, "output_dir", c.output_dir);
  if (c.alpha && c.grid && c.alpha->constant.rows() != c.grid->n)
    fail("alpha", "matrix size does not match grid.n");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

HermitianField build_alpha(const AlphaSpec& spec, const TorusGrid& grid) {
  if (spec.constant.rows() != grid.n()) throw InvalidInput("alpha size does not match the grid");
  const HermitianField a = constant_field(grid, spec.constant);
  if (spec.trig.empty()) return a;
  return a + complex_hessian(trig_potential(grid, spec.trig));
}

Potential build_potential(const PotentialRecipe& recipe, const TorusGrid& grid, std::uint64_t seed,
                          const std::filesystem::path& base_dir) {
  Potential phi = Potential(grid).plus_constant(recipe.constant);
  if (!recipe.trig.empty()) phi += trig_potential(grid, recipe.trig);
  if (!recipe.bumps.empty()) phi += bump_potential(grid, recipe.bumps);
  if (recipe.random.count > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<PeriodicBump> bumps(static_cast<std::size_t>(recipe.random.count));
    for (PeriodicBump& b : bumps) {
      b.amplitude = recipe.random.amplitude * sym(rng);
      for (int a = 0; a < grid.axes(); ++a) b.center[static_cast<std::size_t>(a)] = grid.L() * unit(rng);
      b.width = 0.7 + 0.5 * unit(rng);
    }
    phi += bump_potential(grid, bumps);
  }
  if (!recipe.snapshot.empty()) {
    const std::filesystem::path path =
        recipe.snapshot.is_absolute() ? recipe.snapshot : base_dir / recipe.snapshot;
    const Potential s = load_potential(path);
    if (!(s.grid() == grid)) throw InvalidInput("snapshot '" + path.string() + "' is on a different grid");
    phi += s;
  }
  return phi;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, end - start);
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    item = b == std::string::npos ? "" : item.substr(b, e - b + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v))
      throw InvalidInput(what + ": '" + item + "' is not a number");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace dhym::cli
