#pragma once

// Experiment configs: JSON documents with "schema": "dhymlab/1".
//
//   {
//     "schema": "dhymlab/1",
//     "grid":  {"n": 2, "N": 8, "L": 6.283185307179586, "stencil": "conservative"},
//     "alpha": {"constant": [[3, 0], [0, 3]], "trig": [{"amplitude": 0.1, "wave": [1, 0, 0, 0]}]},
//     "phi0":  {"bumps": [{"amplitude": 0.2, "center": [3.14, 3.14, 3.14, 3.14], "width": 0.8}]},
//     "flow":  {"eps": 1e-3, "t_end": 10},
//     "seed": 20240607,
//     "output_dir": "runs/bump"
//   }
//
// Unknown keys anywhere are rejected with their path.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dhym/flow.hpp"
#include "dhym/geodesic.hpp"
#include "dhym/lemma_checks.hpp"

namespace dhym::cli {

inline constexpr const char* kSchema = "dhymlab/1";

struct GridSpec {
  int n = 1;
  int N = 32;
  double L = 2.0 * std::numbers::pi;
  Stencil stencil = Stencil::conservative;

  TorusGrid build() const { return TorusGrid(n, N, L, stencil); }
};

/// alpha = constant + ddbar(sum of trig terms).
struct AlphaSpec {
  CMatrix constant;
  std::vector<TrigTerm> trig;
};

struct RandomBumps {
  int count = 0;
  double amplitude = 0.0;
};

/// Sum of the listed pieces; an empty recipe is the zero potential.
struct PotentialRecipe {
  double constant = 0.0;
  std::vector<TrigTerm> trig;
  std::vector<PeriodicBump> bumps;
  RandomBumps random;
  std::filesystem::path snapshot;
};

struct FunctionalParams {
  double eps = 1e-3;
  int nodes = kDefaultNodes;
  double delta = 0.1;
  double big_c = 1.0;
};

struct GeodesicParams {
  std::vector<double> eps = kDefaultEpsSchedule;
  double p = 2.0;
  int slices = 32;
  double tol = 1e-10;
  int max_iterations = 200;
};

struct RegularizeParams {
  double radius = 3.0;
  double eta = 0.01;
  int per_axis = 4;
  /// physical half-width of each patch box; <= 0 means 3 L / 16
  double half_width = 0.0;
  double kappa = 0.05;
  int band = 2;
};

struct ExperimentConfig {
  std::optional<GridSpec> grid;
  std::optional<AlphaSpec> alpha;
  std::optional<PotentialRecipe> phi0;
  std::optional<PotentialRecipe> phi1;
  FlowConfig flow;
  FunctionalParams functional;
  GeodesicParams geodesic;
  RegularizeParams regularize;
  std::uint64_t seed = kDefaultSeed;
  std::string output_dir;
  /// relative snapshot paths resolve against this directory
  std::filesystem::path base_dir;
};

/// Throws InvalidInput naming the offending key path.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

HermitianField build_alpha(const AlphaSpec& spec, const TorusGrid& grid);
/// The random part draws from seed; snapshot grids must equal `grid`.
Potential build_potential(const PotentialRecipe& recipe, const TorusGrid& grid,
                          std::uint64_t seed, const std::filesystem::path& base_dir);

/// "2,3,-1.5" -> {2, 3, -1.5}
std::vector<double> parse_list(const std::string& text, const std::string& what);

}  // namespace dhym::cli
