#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dhym::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kNumerical = 2, kSuiteViolation = 3 };

struct OpsArgs {
  std::string op;
  std::string lambda;
  double eps = 0.0;
  std::optional<double> theta;
  std::optional<double> Theta;
};

struct FlowArgs {
  std::string config;
  std::string output_dir;
  bool binary = false;
};

/// Shared by the commands that read potentials from snapshots.
struct ClassArgs {
  std::string config;
  std::string alpha_diag;
};

struct FunctionalArgs {
  ClassArgs cls;
  std::string snapshot;
  std::optional<double> eps;
  std::optional<int> nodes;
  std::optional<double> delta;
  std::optional<double> big_c;
  std::string output;
};

struct GeodesicArgs {
  ClassArgs cls;
  std::string from;
  std::string to;
  std::string eps;
  std::optional<double> p;
  std::optional<int> slices;
  std::string output_dir;
};

struct RegularizeArgs {
  ClassArgs cls;
  std::string snapshot;
  std::optional<double> radius;
  std::optional<double> eta;
  std::optional<int> per_axis;
  std::optional<double> half_width;
  std::optional<double> kappa;
  std::string output_dir;
  bool binary = false;
};

struct VerifyArgs {
  std::vector<std::string> suites;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string output;
};

int run_ops(const OpsArgs& args);
int run_flow(const FlowArgs& args);
int run_functional(const FunctionalArgs& args);
int run_geodesic(const GeodesicArgs& args);
int run_regularize(const RegularizeArgs& args);
int run_verify(const VerifyArgs& args);

}  // namespace dhym::cli
