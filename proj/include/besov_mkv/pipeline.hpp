#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "besov_mkv/fokker_planck.hpp"
#include "besov_mkv/io.hpp"
#include "besov_mkv/kernels.hpp"
#include "besov_mkv/params.hpp"

namespace besov_mkv {

Regime parse_regime(const std::string& name);
std::string to_string(Regime r);

/// Initial datum: a centred isotropic Gaussian, or a grid dump on disk.
struct MuSpec {
  std::string type = "gaussian";
  double variance = 0.25;
  std::string file;
};

struct ExperimentConfig {
  /// Either a file name (resolved against the config's directory) or empty,
  /// in which case `params` was given inline.
  std::string params_file;
  ParameterSet params;
  KernelSpec kernel;
  MuSpec mu;
  Grid grid{1, 5.0, 256};
  SolverConfig solver;
  double t0 = 0.0;
  double S = 0.0625;
  std::vector<double> epsilons{0.2, 0.1};
  Regime mode = Regime::short_time;
  /// Particle stage is skipped when zero.
  std::size_t particles = 0;
  double particle_dt = 0.0;  // defaults to solver.dt
  std::uint64_t seed = 7;
  std::filesystem::path base_dir;
};

/// Parses a config object, or a manifest (which embeds its config under
/// "config"). Paths are resolved against `base_dir`.
ExperimentConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const ExperimentConfig& c);

/// One condition bundle for the regime of `mode`, plus the θ interval and the
/// derived exponents. `feasible` is the conjunction of the required checks.
struct CheckBundle {
  std::vector<ConditionReport> reports;
  bool feasible = false;
  Json json;
};
CheckBundle run_check(const ParameterSet& ps, Regime mode);
Json to_json(const ConditionReport& r);

GridFunction initial_density(const MuSpec& mu, const Grid& grid, const std::filesystem::path& base_dir);

/// Dispatches on the regime. The long-time gate is calibrated from a
/// preliminary short-time style solve of the same data.
DensityPath solve_in_mode(const TimeKernel& b_eps, const GridFunction& mu, double t0, double S,
                          const SolverConfig& cfg, const ParameterSet& ps, Regime mode);

/// norms.csv and the terminal frame of one FP run.
void export_fp_run(const std::filesystem::path& dir, const DensityPath& path, const TimeKernel& b_eps,
                   const SolverConfig& cfg, const GronwallFit* fit);

class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool numeric)
      : std::runtime_error(stage + ": " + what), stage(std::move(stage)), numeric(numeric) {}
  std::string stage;
  bool numeric;
};

struct PipelineResult {
  std::filesystem::path dir;
  Json manifest;
};

/// check, synthesize, mollify ladder, solve FP per epsilon, Cauchy table,
/// envelope, simulate, compare. Writes manifest.json last; the manifest holds
/// no timestamps or thread counts so reruns are byte-identical.
PipelineResult run_pipeline(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace besov_mkv
