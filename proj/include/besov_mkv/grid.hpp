#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace besov_mkv {

using Complex = std::complex<double>;

/// Periodic uniform grid on [-L, L)^d with N points per axis.
///
/// Node j along an axis sits at x_j = -L + j h, h = 2L/N, so the origin is
/// node N/2. Only d in {1, 2} is supported.
struct Grid {
  int d = 1;
  double L = 1.0;
  int N = 64;

  Grid() = default;
  Grid(int d_, double L_, int N_);

  double spacing() const { return 2.0 * L / N; }
  double cell_volume() const;
  std::size_t size() const;  // N^d
  double coordinate(int j) const { return -L + j * spacing(); }
  /// Angular frequency of FFT index k along one axis.
  double frequency(int k) const;
  /// Largest resolved angular frequency (pi / h).
  double nyquist() const;

  bool operator==(const Grid&) const = default;
};

/// Real scalar or vector field sampled on a Grid.
///
/// Vector fields are stored component-major: component c occupies
/// values[c * N^d, (c + 1) * N^d). Each block is row-major.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(const Grid& grid, int components = 1);
  GridFunction(const Grid& grid, int components, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  std::size_t points() const { return grid_.size(); }

  std::span<double> component(int c);
  std::span<const double> component(int c) const;
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Integral of each component (trapezoid rule on the periodic grid).
  double integral(int c = 0) const;
  bool finite() const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);

  /// Samples f at every node. Vector callbacks write `components` values.
  static GridFunction sample(const Grid& grid,
                             const std::function<double(std::span<const double>)>& f);

 private:
  Grid grid_;
  int components_ = 1;
  std::vector<double> values_;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(double s, GridFunction a);

/// Fourier coefficients of one scalar component, normalised as samples of
/// the continuous transform: f_hat(xi_k) ~ int f(x) exp(-i xi_k . x) dx.
///
/// With this normalisation convolution is a pointwise product and the zero
/// mode equals the integral of f.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::vector<Complex>& data() { return data_; }
  const std::vector<Complex>& data() const { return data_; }
  Complex& operator[](std::size_t i) { return data_[i]; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }
  std::size_t size() const { return data_.size(); }

  Spectrum& operator*=(const Spectrum& o);
  Spectrum& operator+=(const Spectrum& o);
  Spectrum& operator-=(const Spectrum& o);
  Spectrum& operator*=(double s);

 private:
  Grid grid_;
  std::vector<Complex> data_;
};

/// Forward transform of component c.
Spectrum to_spectrum(const GridFunction& f, int c = 0);
/// Inverse transform; the imaginary residue is discarded.
GridFunction from_spectrum(const Spectrum& s);
void from_spectrum_into(const Spectrum& s, std::span<double> out);

/// Calls fn(flat_index, xi) for every Fourier mode. `xi` has d entries.
/// The Nyquist index is reported with a positive frequency.
void for_each_mode(const Grid& grid,
                   const std::function<void(std::size_t, std::span<const double>)>& fn);

/// |xi| for every mode, cached per grid.
const std::vector<double>& mode_magnitudes(const Grid& grid);
/// Component c of xi for every mode; Nyquist entries are zeroed so that
/// odd multipliers stay real-preserving.
const std::vector<double>& mode_component(const Grid& grid, int c);

/// Spectral convolution of two scalar fields.
GridFunction convolve(const GridFunction& f, const GridFunction& g);

/// Discrete Dirac mass at the origin (mass 1 in the cell at node N/2).
GridFunction discrete_dirac(const Grid& grid);

/// Trigonometric interpolation of a scalar field at an arbitrary point.
double fourier_interpolate(const Spectrum& s, std::span<const double> x);

/// Periodic (bi)linear interpolation at x; x is wrapped into the box.
double interpolate_linear(const GridFunction& f, int c, std::span<const double> x);

/// Wraps a coordinate into [-L, L).
double wrap(double x, double L);

}  // namespace besov_mkv
