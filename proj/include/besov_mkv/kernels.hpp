#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "besov_mkv/grid.hpp"
#include "besov_mkv/params.hpp"

namespace besov_mkv {

enum class KernelFamily { random_fourier, fractional_derivative_gaussian, gradient_potential };

KernelFamily parse_kernel_family(const std::string& name);
std::string to_string(KernelFamily f);

struct KernelSpec {
  double beta = -1.9;
  double p = kInf;
  double q = kInf;
  KernelFamily family = KernelFamily::random_fourier;
  std::uint64_t seed = 0;
  /// Number of piecewise-constant time slabs (1 = static, at most 8).
  int slabs = 1;
  /// Overall scale of the field.
  double amplitude = 1.0;
  /// Physical band limit; modes with |xi| > cutoff are dropped. 0 keeps all.
  double cutoff = 0.0;
  /// Spatial scale of the closed-form families.
  double width = 0.5;

  void validate() const;
};

/// Piecewise-constant in time: slab k covers [t0 + k tau, t0 + (k + 1) tau),
/// tau = (S - t0) / K. A single slab is a static kernel.
struct TimeKernel {
  std::vector<GridFunction> slabs;
  double t0 = 0.0;
  double S = 1.0;

  const GridFunction& at(double s) const;
  const Grid& grid() const { return slabs.front().grid(); }
  int dim() const { return slabs.front().components(); }
  bool is_zero() const;
};

TimeKernel static_kernel(GridFunction b, double t0 = 0.0, double S = 1.0);
TimeKernel zero_kernel(const Grid& grid, double t0 = 0.0, double S = 1.0);

/// Vector field (d components) of the given family. Random Fourier
/// coefficients are keyed by integer wavevector, so refining the grid keeps
/// the coarse modes unchanged. Refused for N < 64.
GridFunction synthesize_kernel(const KernelSpec& spec, const Grid& grid, int slab = 0);
TimeKernel synthesize_time_kernel(const KernelSpec& spec, const Grid& grid, double t0, double S);

/// Spectral divergence of a d-component field.
GridFunction divergence(const GridFunction& b);

/// b * eta_eps with eta_eps the centred Gaussian of standard deviation eps.
GridFunction mollify(const GridFunction& b, double epsilon);
TimeKernel mollify(const TimeKernel& b, double epsilon);
/// False when epsilon is below the grid spacing.
bool mollifier_resolved(const Grid& grid, double epsilon);

struct MollifierReport {
  std::vector<double> epsilons;
  std::vector<double> beta_bars;
  /// max_eps ||b^eps||_B / ||b||_B in the (beta, p, q) norm.
  double sup_norm_ratio = 1.0;
  /// convergence_table[i][j] = ||b - b^eps_j|| in B^{beta_bars[i]}_{p,q}.
  std::vector<std::vector<double>> convergence_table;
  std::vector<std::string> warnings;
};

MollifierReport mollifier_report(const GridFunction& b, const KernelSpec& spec,
                                 const std::vector<double>& epsilons,
                                 const std::vector<double>& beta_bars, double alpha_ref);

struct RegularityProbe {
  std::vector<int> resolutions;
  std::vector<double> norms;
  /// Least-squares slope of log norm against log N.
  double slope = 0.0;
  bool diverged = false;
};

/// Thermic norm of the synthesized field at index gamma on grids N, 2N, ...
/// with fixed L.
RegularityProbe regularity_probe(const KernelSpec& spec, const Grid& coarse, double gamma,
                                 double alpha_ref, int levels = 3);

}  // namespace besov_mkv
