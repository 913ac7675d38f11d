#pragma once

#include <cstdint>
#include <vector>

#include "besov_mkv/grid.hpp"
#include "besov_mkv/kernels.hpp"
#include "besov_mkv/path.hpp"
#include "besov_mkv/rng.hpp"

namespace besov_mkv {

struct ParticleEnsemble {
  Grid grid;
  int d = 1;
  double alpha = 2.0;
  double time = 0.0;
  /// Unwrapped positions, particle-major (N x d).
  std::vector<double> positions;
  std::vector<Rng> streams;
  /// Number of coordinate wraps of the box performed so far.
  std::int64_t wraps = 0;

  std::size_t size() const { return streams.size(); }
  /// Position of particle i, coordinate c, wrapped into [-L, L).
  double wrapped(std::size_t i, int c) const;
};

struct SimulationOptions {
  /// KDE bandwidth in units of the grid spacing.
  double bandwidth_cells = 2.0;
  /// Store positions every this many steps (the final step is always stored).
  int record_every = 1;
};

struct Trajectory {
  Grid grid;
  double alpha = 2.0;
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  /// Unwrapped positions at each recorded time, particle-major.
  std::vector<std::vector<double>> positions;
  ParticleEnsemble final;
  std::int64_t wraps = 0;

  std::size_t particles() const { return final.size(); }
};

/// Samples N positions from the density mu: inverse CDF in d = 1,
/// rejection from a uniform proposal in d = 2. Particle i uses stream i.
ParticleEnsemble sample_initial(const GridFunction& mu, std::size_t N, double alpha, std::uint64_t seed);

/// Euler scheme X += (b(t) * rho_kde)(X) dt + dW with alpha-stable dW.
/// Throws NumericError(instability) when a drift step exceeds three box widths.
Trajectory simulate(const TimeKernel& b_eps, const GridFunction& mu, double alpha, double t0,
                    double S, std::size_t N, double dt, std::uint64_t seed,
                    const SimulationOptions& opts = {});

/// Binned (cloud-in-cell, exact integer counts) density smoothed by a
/// Gaussian of standard deviation `bandwidth`. Integrates to 1.
GridFunction empirical_density(const std::vector<double>& positions, int d, const Grid& grid,
                               double bandwidth);

/// Applies the smoothing of empirical_density (binning + Gaussian) to a density.
GridFunction kde_smooth(const GridFunction& rho, double bandwidth);

/// L1 distance between the KDE of the trajectory and the path frame at each
/// path node that is also a recorded time. With `matched`, the frame is
/// smoothed by the same kernel first.
std::vector<double> compare_to_fp(const Trajectory& traj, const DensityPath& path, double bandwidth,
                                  bool matched = true);

struct YoungReconstruction {
  std::vector<double> partition;
  /// Per particle and interval: A(t_i, t_{i+1}), d components, particle-major
  /// within each interval.
  std::vector<std::vector<double>> pseudo_increments;
  /// Per particle, d components.
  std::vector<double> riemann_sum;
  std::vector<double> reference;
  /// Mean over particles of |riemann_sum - reference|.
  double gap = 0.0;
};

/// Partition points must be recorded trajectory times and path nodes (or t0).
YoungReconstruction young_reconstruction(const TimeKernel& b, const DensityPath& path,
                                         const Trajectory& traj, const std::vector<double>& partition);

/// Mean |X^eps_s - X^{eps/2}_s| per recorded node for two runs sharing every
/// noise stream. d = 1 only.
std::vector<double> pathwise_probe_d1(const TimeKernel& b, const GridFunction& mu, double alpha,
                                      double t0, double S, std::size_t N, double dt, double epsilon,
                                      std::uint64_t shared_seed, const SimulationOptions& opts = {});

struct TightnessFit {
  std::vector<double> lags;
  std::vector<double> moments;
  double slope = 0.0;
  bool passes = false;
};

/// E|X_{s+lag} - X_s|^lambda averaged over particles and start times, with
/// a log-log fit against lag. Passes when slope >= 1 + xi_min (alpha = 2)
/// or slope >= xi_min (alpha < 2).
TightnessFit tightness_moments(const Trajectory& traj, double lambda, const std::vector<int>& lag_steps,
                               double xi_min = 0.05);

/// Per-record moments of the unwrapped positions: `mean` of the first
/// coordinate, `var` the trace of the covariance. `l1_to_fp` compares the KDE
/// against the matched-smoothing FP frame (NaN where the path has no frame).
struct TrajectorySummary {
  std::vector<double> s;
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> l1_to_fp;
};
TrajectorySummary summarize_trajectory(const Trajectory& traj, const DensityPath& path, double bandwidth);

}  // namespace besov_mkv
