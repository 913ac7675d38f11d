#pragma once

#include <array>
#include <vector>

#include "besov_mkv/grid.hpp"
#include "besov_mkv/rng.hpp"

namespace besov_mkv {

struct BesovSpec;

/// Smallest time whose symbol exp(-t |xi|^alpha) decays below 1e-12 at the
/// largest resolved radial frequency.
double stable_min_time(double alpha, const Grid& grid);

/// Upper bound on the mass of p^alpha_t outside [-L, L] along one axis:
/// erfc(L / (2 sqrt t)) for alpha = 2, A_alpha t L^-alpha otherwise.
double stable_tail_bound(double alpha, double t, double L);

/// exp(-t |xi|^alpha) on the dual grid.
Spectrum stable_symbol(double alpha, double t, const Grid& grid);

/// Periodised alpha-stable density p^alpha_t. Throws DomainError for t <= 0
/// and RefinementError when t is below stable_min_time or the tail bound
/// exceeds tail_tol.
GridFunction stable_density(double alpha, double t, const Grid& grid, double tail_tol = 1e-6);

/// Spectral gradient of stable_density (vector field with d components).
GridFunction grad_stable_density(double alpha, double t, const Grid& grid,
                                 double tail_tol = 1e-6);

/// Exponent predicted by the heat-kernel bounds.
/// Short time: -((gamma/alpha + (d/alpha)(1 - 1/ell))_+ + a/alpha).
/// Long time:  -(d/alpha)(1 - 1/ell) - a/alpha.
double hk_exponent(double alpha, int d, const BesovSpec& spec, int deriv_order, bool long_time);

struct HkFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> times;
  std::vector<double> norms;
};

/// Least-squares slope of log ||d^a p^alpha_s||_B against log s.
/// deriv_order 1 uses the first gradient component.
HkFit verify_hk_exponent(double alpha, const BesovSpec& spec, int deriv_order,
                         const std::vector<double>& times, const Grid& grid);

/// dt^(1/alpha) S with S standard isotropic alpha-stable, characteristic
/// function exp(-|xi|^alpha). Only the first d entries are meaningful.
std::array<double, 2> sample_stable_increment(double alpha, double dt, int d, Rng& rng);

}  // namespace besov_mkv
