// dhym: command-line front end.
//
//   dhym ops eval --lambda 2,3 --eps 0.5
//   dhym flow --config configs/fixedpoint.json
//   dhym functional --snapshot phi.csv --alpha-diag 2 --eps 1e-3
//   dhym geodesic --from a.csv --to b.csv --alpha-diag 2 --eps 0.2,0.1,0.05 --p 2
//   dhym regularize --snapshot u.csv --alpha-diag 2 --radius 3 --eta 0.01
//   dhym verify --suite eigenops --seed 7
//
// Exit status: 0 success, 1 invalid input, 2 numerical failure, 3 suite violation.

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "dhym/error.hpp"

namespace {

using namespace dhym::cli;

void add_class_options(CLI::App* cmd, ClassArgs& cls) {
  cmd->add_option("--config", cls.config, "dhymlab/1 config supplying grid, alpha, recipes and defaults");
  cmd->add_option("--alpha-diag", cls.alpha_diag, "constant diagonal alpha: one value or n comma-separated");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dhym: numerical lab for the hypercritical dHYM equation on flat tori"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dhym 0.1.0");

  OpsArgs ops;
  auto* ops_cmd = app.add_subcommand("ops", "evaluate the eigenvalue operator F_eps and its phases");
  ops_cmd->add_option("op", ops.op, "eval | grad | hess | phase")
      ->required()
      ->check(CLI::IsMember({"eval", "grad", "hess", "phase"}));
  ops_cmd->add_option("--lambda", ops.lambda, "eigenvalues, comma-separated")->required();
  ops_cmd->add_option("--eps", ops.eps, "twist parameter eps >= 0");
  ops_cmd->add_option("--theta", ops.theta, "cone parameter theta (phase only)");
  ops_cmd->add_option("--Theta", ops.Theta, "cone parameter Theta (phase only)");

  FlowArgs flow;
  auto* flow_cmd = app.add_subcommand("flow", "run the twisted dHYM flow from a config");
  flow_cmd->add_option("--config", flow.config, "dhymlab/1 config")->required();
  flow_cmd->add_option("--output-dir", flow.output_dir, "output directory (default: config, then $DHYM_OUTPUT_DIR)");
  flow_cmd->add_flag("--binary", flow.binary, "write snapshots in the binary encoding");

  FunctionalArgs fn;
  auto* fn_cmd = app.add_subcommand("functional", "evaluate J, J0, J_eps and Im Z of a potential");
  add_class_options(fn_cmd, fn.cls);
  fn_cmd->add_option("--snapshot", fn.snapshot, "potential snapshot file");
  fn_cmd->add_option("--eps", fn.eps, "eps for J_eps");
  fn_cmd->add_option("--nodes", fn.nodes, "Gauss-Legendre nodes in t");
  fn_cmd->add_option("--delta", fn.delta, "delta of the coercivity gap");
  fn_cmd->add_option("--bigC", fn.big_c, "constant C of the coercivity gap");
  fn_cmd->add_option("--output", fn.output, "also write the JSON report here");

  GeodesicArgs geo;
  auto* geo_cmd = app.add_subcommand("geodesic", "solve eps-geodesics and estimate d_p");
  add_class_options(geo_cmd, geo.cls);
  geo_cmd->add_option("--from", geo.from, "start potential snapshot");
  geo_cmd->add_option("--to", geo.to, "end potential snapshot");
  geo_cmd->add_option("--eps", geo.eps, "eps schedule, comma-separated (default 0.2,0.1,0.05)");
  geo_cmd->add_option("--p", geo.p, "exponent p >= 1");
  geo_cmd->add_option("--slices", geo.slices, "t slices");
  geo_cmd->add_option("--output-dir", geo.output_dir, "output directory");

  RegularizeArgs reg;
  auto* reg_cmd = app.add_subcommand("regularize", "mollify a potential and glue box patches");
  add_class_options(reg_cmd, reg.cls);
  reg_cmd->add_option("--snapshot", reg.snapshot, "potential snapshot file");
  reg_cmd->add_option("--radius", reg.radius, "mollifier radius in grid cells (>= 2)");
  reg_cmd->add_option("--eta", reg.eta, "regularized max width");
  reg_cmd->add_option("--per-axis", reg.per_axis, "patch centres per axis");
  reg_cmd->add_option("--half-width", reg.half_width, "patch half-width (default 3L/16)");
  reg_cmd->add_option("--kappa", reg.kappa, "patch quadratic damping");
  reg_cmd->add_option("--output-dir", reg.output_dir, "output directory");
  reg_cmd->add_flag("--binary", reg.binary, "write snapshots in the binary encoding");

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify", "run the property suites and report JSON");
  ver_cmd->add_option("--suite", ver.suites, "eigenops | functionals | flow | geodesic | regularize | all");
  ver_cmd->add_option("--seed", ver.seed, "sampler seed")->each([&](const std::string&) { ver.seed_given = true; });
  ver_cmd->add_option("--output", ver.output, "also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*ops_cmd) return run_ops(ops);
    if (*flow_cmd) return run_flow(flow);
    if (*fn_cmd) return run_functional(fn);
    if (*geo_cmd) return run_geodesic(geo);
    if (*reg_cmd) return run_regularize(reg);
    if (*ver_cmd) return run_verify(ver);
  } catch (const dhym::Error& e) {
    std::cerr << "dhym: " << e.what() << "\n";
    return e.kind() == dhym::ErrorKind::validation ? kValidation : kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "dhym: " << e.what() << "\n";
    return kValidation;
  }
  return kValidation;
}
