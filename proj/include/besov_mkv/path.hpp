#pragma once

#include <vector>

#include "besov_mkv/besov.hpp"
#include "besov_mkv/grid.hpp"

namespace besov_mkv {

/// Density frames at increasing nodes in (t0, S].
struct DensityPath {
  Grid grid;
  double t0 = 0.0;
  std::vector<double> times;
  std::vector<GridFunction> frames;
  /// Time weight and norm the path was solved in.
  WeightSpec gamma_meta;
  BesovSpec norm_spec;
  GridFunction initial;

  std::vector<double> picard_distances;
  int iterations = 0;
  double residual = 0.0;

  std::size_t size() const { return times.size(); }
  double elapsed(std::size_t j) const { return times[j] - t0; }
};

/// sup_j w(s_j - t0) ||path(s_j)||_B for r = inf, otherwise
/// (sum_j dt_j (w ||path(s_j)||_B)^r)^(1/r).
double weighted_path_norm(const DensityPath& path, double r, const WeightSpec& w,
                          const BesovSpec& spec, double alpha_ref);

}  // namespace besov_mkv
