#include "besov_mkv/stable_kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "besov_mkv/besov.hpp"
#include "besov_mkv/errors.hpp"

namespace besov_mkv {

namespace {

constexpr double kSymbolFloor = 1e-12;

int next_power_of_two(double x) {
  int n = 8;
  while (n < x) n *= 2;
  return n;
}

void check_time(double alpha, double t, const Grid& grid, double tail_tol) {
  if (!(t > 0.0)) throw DomainError("stable density: t must be positive");
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("stable density: alpha must lie in (1, 2]");
  double t_min = stable_min_time(alpha, grid);
  if (t < t_min) {
    // Resolution needed so that exp(-t (pi N / 2L)^alpha) < 1e-12.
    double k_needed = std::pow(-std::log(kSymbolFloor) / t, 1.0 / alpha);
    int n = next_power_of_two(k_needed * 2.0 * grid.L / std::numbers::pi);
    throw RefinementError("stable density: t = " + std::to_string(t) +
                              " is below the resolvable time " + std::to_string(t_min),
                          n);
  }
  double tail = stable_tail_bound(alpha, t, grid.L);
  if (tail > tail_tol)
    throw RefinementError("stable density: tail mass " + std::to_string(tail) +
                              " outside the box exceeds tolerance",
                          grid.N);
}

}  // namespace

double stable_min_time(double alpha, const Grid& grid) {
  return -std::log(kSymbolFloor) / std::pow(grid.nyquist(), alpha);
}

double stable_tail_bound(double alpha, double t, double L) {
  if (alpha == 2.0) return std::erfc(L / (2.0 * std::sqrt(t)));
  // Two-sided mass beyond L of the heavy tail c_alpha |x|^{-1-alpha} t.
  double a = 2.0 * std::tgamma(alpha) * std::sin(std::numbers::pi * alpha / 2.0) / std::numbers::pi;
  return a * t * std::pow(L, -alpha);
}

Spectrum stable_symbol(double alpha, double t, const Grid& grid) {
  Spectrum s(grid);
  const auto& mag = mode_magnitudes(grid);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::exp(-t * std::pow(mag[i], alpha));
  return s;
}

GridFunction stable_density(double alpha, double t, const Grid& grid, double tail_tol) {
  check_time(alpha, t, grid, tail_tol);
  return from_spectrum(stable_symbol(alpha, t, grid));
}

GridFunction grad_stable_density(double alpha, double t, const Grid& grid, double tail_tol) {
  check_time(alpha, t, grid, tail_tol);
  Spectrum s = stable_symbol(alpha, t, grid);
  GridFunction out(grid, grid.d);
  for (int c = 0; c < grid.d; ++c) {
    const auto& xi = mode_component(grid, c);
    Spectrum ds(grid);
    for (std::size_t i = 0; i < s.size(); ++i) ds[i] = Complex(0.0, xi[i]) * s[i];
    from_spectrum_into(ds, out.component(c));
  }
  return out;
}

double hk_exponent(double alpha, int d, const BesovSpec& spec, int deriv_order, bool long_time) {
  double integ = (d / alpha) * (1.0 - (std::isinf(spec.ell) ? 0.0 : 1.0 / spec.ell));
  if (long_time) return -integ - deriv_order / alpha;
  return -(pos(spec.gamma / alpha + integ) + deriv_order / alpha);
}

HkFit verify_hk_exponent(double alpha, const BesovSpec& spec, int deriv_order,
                         const std::vector<double>& times, const Grid& grid) {
  if (times.size() < 3) throw std::invalid_argument("verify_hk_exponent: need at least 3 times");
  if (deriv_order != 0 && deriv_order != 1) throw DomainError("deriv_order must be 0 or 1");
  BesovOptions opts;
  opts.detect_divergence = false;
  ThermicNormEvaluator eval(grid, spec, alpha, opts);
  HkFit fit;
  fit.times = times;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(times.size());
  for (double t : times) {
    // The box is the caller's choice, so only resolution is checked.
    check_time(alpha, t, grid, kInf);
    Spectrum s = stable_symbol(alpha, t, grid);
    if (deriv_order == 1) {
      const auto& xi = mode_component(grid, 0);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] *= Complex(0.0, xi[i]);
    }
    double norm = eval.from_spectrum(s).total;
    fit.norms.push_back(norm);
    double x = std::log(t), y = std::log(norm);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 1e-14)) throw std::invalid_argument("verify_hk_exponent: degenerate times");
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

std::array<double, 2> sample_stable_increment(double alpha, double dt, int d, Rng& rng) {
  if (!(dt > 0.0)) throw DomainError("sample_stable_increment: dt must be positive");
  std::array<double, 2> out{0.0, 0.0};
  if (alpha == 2.0) {
    const double sd = std::sqrt(2.0 * dt);
    for (int c = 0; c < d; ++c) out[c] = sd * rng.normal();
    return out;
  }
  const double scale = std::pow(dt, 1.0 / alpha);
  if (d == 1) {
    // Chambers-Mallows-Stuck, symmetric case.
    double v = std::numbers::pi * (rng.uniform() - 0.5);
    double w = rng.exponential();
    double s = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
               std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
    out[0] = scale * s;
    return out;
  }
  // Sub-Gaussian representation: sqrt(A) N(0, 2 I) with A positive
  // (alpha/2)-stable, E exp(-lambda A) = exp(-lambda^(alpha/2)) (Kanter).
  const double a = alpha / 2.0;
  double u = std::numbers::pi * rng.uniform();
  double w = rng.exponential();
  double A = std::sin(a * u) / std::pow(std::sin(u), 1.0 / a) *
             std::pow(std::sin((1.0 - a) * u) / w, (1.0 - a) / a);
  double root = std::sqrt(2.0 * A);
  for (int c = 0; c < d; ++c) out[c] = scale * root * rng.normal();
  return out;
}

}  // namespace besov_mkv
