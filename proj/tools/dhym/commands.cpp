#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "config.hpp"
#include "dhym/error.hpp"
#include "dhym/regularize.hpp"
#include "dhym/snapshot.hpp"
#include "dhym/suites.hpp"

namespace dhym::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using ordered = nlohmann::ordered_json;

namespace {

fs::path resolve_output_dir(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  if (const char* env = std::getenv("DHYM_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "dhym-out";
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw InvalidInput("cannot write '" + path.string() + "'");
  os.precision(17);
  return os;
}

// Writes the report to stdout and, when given, to a file.
void emit(const ordered& report, const fs::path& file = {}) {
  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (file.empty()) return;
  if (file.has_parent_path()) make_dir(file.parent_path());
  open_out(file) << text;
}

std::string number_tag(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

ordered grid_json(const TorusGrid& g) {
  return {{"n", g.n()}, {"N", g.N()}, {"L", g.L()}, {"stencil", to_string(g.stencil())}};
}

ordered class_json(const CalibrationData& cal) {
  return {{"theta0", cal.theta0}, {"Theta0", cal.Theta0}, {"a0", cal.a0}};
}

std::optional<ExperimentConfig> maybe_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_config(path);
}

// Reference form for commands whose potentials come from snapshots.
CalibrationData resolve_class(const ClassArgs& args, const std::optional<ExperimentConfig>& cfg,
                              const TorusGrid& grid) {
  if (!args.alpha_diag.empty()) {
    std::vector<double> d = parse_list(args.alpha_diag, "--alpha-diag");
    if (d.size() == 1) d.assign(static_cast<std::size_t>(grid.n()), d[0]);
    if (static_cast<int>(d.size()) != grid.n())
      throw InvalidInput("--alpha-diag needs 1 or n = " + std::to_string(grid.n()) + " values");
    CMatrix m = CMatrix::Zero(grid.n(), grid.n());
    for (int i = 0; i < grid.n(); ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return compute_theta0(constant_field(grid, m));
  }
  if (cfg && cfg->alpha) return compute_theta0(build_alpha(*cfg->alpha, grid));
  throw InvalidInput("no reference form: pass --alpha-diag or a config with an 'alpha' block");
}

// Potential from a snapshot flag, else from a recipe in the config.
Potential resolve_potential(const std::string& snapshot, const std::optional<ExperimentConfig>& cfg,
                            const std::optional<PotentialRecipe> ExperimentConfig::*recipe,
                            const char* what) {
  if (!snapshot.empty()) {
    const Potential phi = load_potential(snapshot);
    if (cfg && cfg->grid && !(cfg->grid->build() == phi.grid()))
      throw InvalidInput(std::string(what) + " snapshot grid differs from the config grid");
    return phi;
  }
  if (cfg && ((*cfg).*recipe)) {
    if (!cfg->grid) throw InvalidInput("config: grid: required to build " + std::string(what));
    return build_potential(*((*cfg).*recipe), cfg->grid->build(), cfg->seed, cfg->base_dir);
  }
  throw InvalidInput(std::string("no ") + what + ": pass a snapshot or a config recipe");
}

std::string list_text(const Eigen::VectorXd& v) {
  std::string out;
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.12g", i ? "," : "", v[i]);
    out += buf;
  }
  return out;
}

}  // namespace

int run_ops(const OpsArgs& args) {
  const std::vector<double> lambda = parse_list(args.lambda, "--lambda");
  if (!(args.eps >= 0.0)) throw InvalidInput("--eps must be >= 0");
  std::cout.precision(12);
  if (args.op == "eval") {
    std::printf("%.12g\n", f_eps(std::span<const double>(lambda), args.eps));
  } else if (args.op == "grad") {
    std::printf("%s\n", list_text(grad_f_eps(std::span<const double>(lambda), args.eps)).c_str());
  } else if (args.op == "hess") {
    const Eigen::MatrixXd h = hess_f_eps(std::span<const double>(lambda), args.eps);
    for (Eigen::Index i = 0; i < h.rows(); ++i) std::printf("%s\n", list_text(h.row(i).transpose()).c_str());
  } else if (args.op == "phase") {
    const std::span<const double> l(lambda);
    const ReIm z = product_re_im(l);
    ordered out{{"Q", phase_q(l)}, {"P", phase_p(l)}, {"Qhat", phase_qhat(l)}, {"re", z.re}, {"im", z.im}};
    if (args.theta || args.Theta) {
      if (!args.theta || !args.Theta) throw InvalidInput("cone membership needs both --theta and --Theta");
      const ConeMembership c = in_cone(l, ConeSpec(*args.theta, *args.Theta));
      out["cone"] = {{"inside", c.inside}, {"margin", c.margin}};
    }
    emit(out);
  } else {
    throw InvalidInput("unknown ops operation '" + args.op + "'");
  }
  return kOk;
}

int run_flow(const FlowArgs& args) {
  const ExperimentConfig cfg = load_config(args.config);
  if (!cfg.grid) throw InvalidInput("config: grid: required");
  if (!cfg.alpha) throw InvalidInput("config: alpha: required");
  const TorusGrid grid = cfg.grid->build();
  const CalibrationData cal = compute_theta0(build_alpha(*cfg.alpha, grid));
  const Potential phi0 = cfg.phi0 ? build_potential(*cfg.phi0, grid, cfg.seed, cfg.base_dir) : Potential(grid);
  const fs::path out = resolve_output_dir(args.output_dir, cfg.output_dir);
  const Encoding enc = args.binary ? Encoding::binary : Encoding::csv;
  const std::string ext = args.binary ? ".bin" : ".csv";

  const FlowTrace tr = run(cal, phi0, cfg.flow);

  make_dir(out);
  {
    std::ofstream os = open_out(out / "trace.csv");
    write_trace_csv(os, tr);
  }
  ordered files{{"trace", "trace.csv"}, {"final", "final" + ext}};
  save_potential(out / ("final" + ext), *tr.final_phi, enc);
  ordered snaps = ordered::array();
  for (const auto& [t, phi] : tr.snapshots) {
    const std::string name = "snapshot_t" + number_tag(t) + ext;
    save_potential(out / name, phi, enc);
    snaps.push_back({{"t", t}, {"file", name}});
  }
  files["snapshots"] = snaps;

  const FlowSample& first = tr.samples.front();
  const FlowSample& last = tr.samples.back();
  double drift = 0.0;
  for (const FlowSample& s : tr.samples) drift = std::max(drift, std::abs(s.im_z - first.im_z));
  ordered report{{"schema", kSchema},
                 {"command", "flow"},
                 {"grid", grid_json(grid)},
                 {"class", class_json(cal)},
                 {"eps", cfg.flow.eps},
                 {"converged", tr.converged},
                 {"steps", tr.steps},
                 {"rejections", tr.rejections},
                 {"trace_length", tr.samples.size()},
                 {"t_final", last.t},
                 {"sup_phidot_final", last.sup_phidot},
                 {"running",
                  {{"min_f", tr.running_min_f},
                   {"max_f", tr.running_max_f},
                   {"min_q", tr.running_min_q},
                   {"max_q", tr.running_max_q},
                   {"min_lambda", tr.running_min_lambda}}},
                 {"im_z_drift", cfg.flow.monitor_functionals ? ordered(drift) : ordered(nullptr)},
                 {"decay_slope", tr.decay_slope()},
                 {"max_dissipation_mismatch",
                  cfg.flow.monitor_functionals ? ordered(tr.max_dissipation_mismatch()) : ordered(nullptr)},
                 {"files", files}};
  emit(report, out / "flow.json");
  return kOk;
}

int run_functional(const FunctionalArgs& args) {
  const std::optional<ExperimentConfig> cfg = maybe_config(args.cls.config);
  const Potential phi = resolve_potential(args.snapshot, cfg, &ExperimentConfig::phi0, "potential");
  const CalibrationData cal = resolve_class(args.cls, cfg, phi.grid());
  FunctionalParams p = cfg ? cfg->functional : FunctionalParams{};
  if (args.eps) p.eps = *args.eps;
  if (args.nodes) p.nodes = *args.nodes;
  if (args.delta) p.delta = *args.delta;
  if (args.big_c) p.big_c = *args.big_c;
  if (!(p.eps >= 0.0)) throw InvalidInput("--eps must be >= 0");

  const PointwiseForms forms = evaluate_forms(cal, phi);
  const Membership h = membership(cal, forms, 0.0);
  const EnergyPair e = j_eps_and_im_z(cal, phi, p.eps, p.nodes);
  ordered report{{"schema", kSchema},
                 {"command", "functional"},
                 {"grid", grid_json(phi.grid())},
                 {"class", class_json(cal)},
                 {"eps", p.eps},
                 {"nodes", p.nodes},
                 {"J", j(cal, phi, p.nodes)},
                 {"J0", j0(cal, phi, p.nodes)},
                 {"Jeps", e.j_eps},
                 {"ImZ", e.im_z},
                 {"coercivity_gap",
                  {{"delta", p.delta}, {"bigC", p.big_c}, {"value", coercivity_gap(cal, phi, p.delta, p.big_c, p.nodes)}}},
                 {"margins",
                  {{"inside_H", h.inside},
                   {"cone", h.margin},
                   {"min_lambda_plus_tan_theta0", forms.phase.min_eigenvalue.minCoeff() + std::tan(cal.theta0)},
                   {"positivity_slack", hc_positivity_slack(cal, forms, 0.0)}}}};
  emit(report, args.output.empty() ? fs::path{} : fs::path(args.output));
  return kOk;
}

int run_geodesic(const GeodesicArgs& args) {
  const std::optional<ExperimentConfig> cfg = maybe_config(args.cls.config);
  const Potential a = resolve_potential(args.from, cfg, &ExperimentConfig::phi0, "start potential");
  const Potential b = resolve_potential(args.to, cfg, &ExperimentConfig::phi1, "end potential");
  if (!(a.grid() == b.grid())) throw InvalidInput("endpoints live on different grids");
  const CalibrationData cal = resolve_class(args.cls, cfg, a.grid());
  GeodesicParams p = cfg ? cfg->geodesic : GeodesicParams{};
  if (!args.eps.empty()) p.eps = parse_list(args.eps, "--eps");
  if (args.p) p.p = *args.p;
  if (args.slices) p.slices = *args.slices;
  if (p.eps.empty()) throw InvalidInput("eps list is empty");
  if (!(p.p >= 1.0)) throw InvalidInput("--p must be >= 1");
  const fs::path out = resolve_output_dir(args.output_dir, cfg ? cfg->output_dir : "");

  GeodesicConfig gc;
  gc.slices = p.slices;
  gc.tol = p.tol;
  gc.max_iterations = p.max_iterations;
  std::vector<double> lengths;
  ordered runs = ordered::array();
  make_dir(out);
  for (double eps : p.eps) {
    gc.eps = eps;
    const GeodesicSolution s = solve_eps_geodesic(cal, a, b, gc);
    const EnergyProfile e = energy_profile(cal, s.path, p.p);
    const std::string name = "energy_eps" + number_tag(eps) + ".csv";
    {
      std::ofstream os = open_out(out / name);
      os << "t,e_p,e_p_delta\n";
      for (std::size_t i = 0; i < e.t.size(); ++i) os << e.t[i] << ',' << e.e_p[i] << ',' << e.e_p_delta[i] << '\n';
    }
    lengths.push_back(length_p(cal, s.path, p.p));
    const GeodesicReport& r = s.report;
    runs.push_back({{"eps", eps},
                    {"converged", r.converged},
                    {"iterations", r.iterations},
                    {"rejections", r.rejections},
                    {"residual", r.residual},
                    {"eqn_residual", r.eqn_residual},
                    {"identity_residual", r.identity_residual},
                    {"min_phi_tt", r.min_phi_tt},
                    {"max_phi_t", r.max_phi_t},
                    {"path_margin", r.path_margin},
                    {"length", lengths.back()},
                    {"energy_spread_delta", e.spread_delta()},
                    {"energy_file", name}});
  }
  const DpLowerBound lb = dp_lower_bound(cal, a, b, p.p);
  const double d = extrapolate_eps2(p.eps, lengths);
  ordered report{{"schema", kSchema},
                 {"command", "geodesic"},
                 {"grid", grid_json(a.grid())},
                 {"class", class_json(cal)},
                 {"p", p.p},
                 {"slices", p.slices},
                 {"runs", runs},
                 {"dp_extrapolated", d},
                 {"dp_power_p", std::pow(d, p.p)},
                 {"lower_bound", {{"from_phi0", lb.from_phi0}, {"from_phi1", lb.from_phi1}, {"value", lb.value()}}}};
  emit(report, out / "geodesic.json");
  return kOk;
}

int run_regularize(const RegularizeArgs& args) {
  const std::optional<ExperimentConfig> cfg = maybe_config(args.cls.config);
  const Potential u = resolve_potential(args.snapshot, cfg, &ExperimentConfig::phi0, "potential");
  const CalibrationData cal = resolve_class(args.cls, cfg, u.grid());
  RegularizeParams p = cfg ? cfg->regularize : RegularizeParams{};
  if (args.radius) p.radius = *args.radius;
  if (args.eta) p.eta = *args.eta;
  if (args.per_axis) p.per_axis = *args.per_axis;
  if (args.half_width) p.half_width = *args.half_width;
  if (args.kappa) p.kappa = *args.kappa;
  const double half_width = p.half_width > 0.0 ? p.half_width : 3.0 * u.grid().L() / 16.0;
  const fs::path out = resolve_output_dir(args.output_dir, cfg ? cfg->output_dir : "");
  const Encoding enc = args.binary ? Encoding::binary : Encoding::csv;
  const std::string ext = args.binary ? ".bin" : ".csv";

  const MollifierSpec spec(p.radius);
  const MollifyReport m = phase_after_mollify_check(cal, u, spec);
  const Potential smooth = mollify(u, spec);
  const GlueResult g = glue(cal, make_box_patches(smooth, p.per_axis, half_width, p.kappa, p.band), p.eta);

  make_dir(out);
  save_potential(out / ("mollified" + ext), smooth, enc);
  save_potential(out / ("glued" + ext), g.phi, enc);
  ordered report{{"schema", kSchema},
                 {"command", "regularize"},
                 {"grid", grid_json(u.grid())},
                 {"class", class_json(cal)},
                 {"mollifier",
                  {{"radius", p.radius},
                   {"phase_slack", m.phase_slack},
                   {"psh_slack", m.psh_slack},
                   {"hessian_commutation", m.hessian_commutation},
                   {"phase_shift", m.phase_shift}}},
                 {"gluing",
                  {{"eta", p.eta},
                   {"per_axis", p.per_axis},
                   {"half_width", half_width},
                   {"kappa", p.kappa},
                   {"band", p.band},
                   {"min_patch_margin", g.min_patch_margin},
                   {"glued_margin", g.glued_margin},
                   {"max_cover", g.max_cover},
                   {"c2_norm", g.c2_norm},
                   {"max_gradient_jump", g.max_gradient_jump}}},
                 {"files", {{"mollified", "mollified" + ext}, {"glued", "glued" + ext}}}};
  emit(report, out / "regularize.json");
  return kOk;
}

int run_verify(const VerifyArgs& args) {
  std::vector<std::string> names = args.suites;
  if (names.empty() || (names.size() == 1 && names[0] == "all")) names = suite_names();
  for (const std::string& n : names) {
    if (std::find(suite_names().begin(), suite_names().end(), n) == suite_names().end())
      throw InvalidInput("unknown suite '" + n + "'");
  }
  const std::uint64_t seed = args.seed_given ? args.seed : kDefaultSeed;

  bool all_passed = true;
  int violations = 0;
  ordered suites = ordered::array();
  for (const std::string& n : names) {
    const SuiteReport rep = run_suite(n, seed);
    all_passed = all_passed && rep.passed();
    violations += rep.violations();
    ordered checks = ordered::array();
    for (const Check& c : rep.checks) {
      ordered item{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}, {"detail", c.detail}};
      if (c.criterion > 0) item["criterion"] = c.criterion;
      checks.push_back(item);
    }
    ordered constants = ordered::object();
    for (const auto& [k, v] : rep.constants) constants[k] = v;
    suites.push_back({{"suite", n},
                      {"passed", rep.passed()},
                      {"violations", rep.violations()},
                      {"checks", checks},
                      {"constants", constants}});
  }
  ordered report{{"schema", kSchema},
                 {"command", "verify"},
                 {"seed", seed},
                 {"passed", all_passed},
                 {"violations", violations},
                 {"suites", suites}};
  emit(report, args.output.empty() ? fs::path{} : fs::path(args.output));
  return all_passed ? kOk : kSuiteViolation;
}

}  // namespace dhym::cli
