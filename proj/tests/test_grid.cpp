#include <cmath>
#include <numbers>

#include "besov_mkv/grid.hpp"
#include "doctest.h"

using namespace besov_mkv;

namespace {

double gaussian(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

TEST_CASE("grid geometry") {
  Grid g(1, 2.0, 16);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.coordinate(8) == doctest::Approx(0.0));
  CHECK(g.frequency(1) == doctest::Approx(std::numbers::pi / 2.0));
  CHECK(g.frequency(15) == doctest::Approx(-std::numbers::pi / 2.0));
  CHECK_THROWS(Grid(1, 1.0, 12));
  CHECK_THROWS(Grid(3, 1.0, 16));
}

TEST_CASE("spectrum samples the continuous transform") {
  Grid g(1, 10.0, 256);
  auto f = GridFunction::sample(g, [](auto x) { return gaussian(x[0], 0.5); });
  auto s = to_spectrum(f);
  for (int k : {0, 1, 5, 20}) {
    double xi = g.frequency(k);
    CHECK(std::abs(s[k] - Complex(std::exp(-0.25 * xi * xi), 0.0)) < 1e-12);
  }
  auto back = from_spectrum(s);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-12));
}

TEST_CASE("two-dimensional transform and mass") {
  Grid g(2, 8.0, 64);
  auto f = GridFunction::sample(g, [](auto x) { return gaussian(x[0] - 1.0, 1.0) * gaussian(x[1], 0.5); });
  CHECK(f.integral() == doctest::Approx(1.0).epsilon(1e-10));
  auto s = to_spectrum(f);
  CHECK(s[0].real() == doctest::Approx(1.0).epsilon(1e-10));
  // shift by +1 along the first axis multiplies by exp(-i xi)
  std::size_t idx = 3 * 64 + 2;
  double xi1 = g.frequency(3), xi2 = g.frequency(2);
  Complex expect = std::exp(Complex(-0.5 * xi1 * xi1 - 0.25 * xi2 * xi2, -xi1));
  CHECK(std::abs(s[idx] - expect) < 1e-10);
}

TEST_CASE("convolution of Gaussians adds variances") {
  Grid g(1, 12.0, 512);
  auto f = GridFunction::sample(g, [](auto x) { return gaussian(x[0], 0.3); });
  auto h = GridFunction::sample(g, [](auto x) { return gaussian(x[0], 0.7); });
  auto c = convolve(f, h);
  for (std::size_t i = 0; i < g.size(); i += 7)
    CHECK(std::abs(c[i] - gaussian(g.coordinate(static_cast<int>(i)), 1.0)) < 1e-12);
  auto id = convolve(f, discrete_dirac(g));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(id[i] - f[i]) < 1e-12);
}

TEST_CASE("interpolation") {
  Grid g(1, 5.0, 128);
  auto f = GridFunction::sample(g, [](auto x) { return std::sin(2.0 * std::numbers::pi * x[0] / 5.0); });
  auto s = to_spectrum(f);
  double x = 0.3141;
  double exact = std::sin(2.0 * std::numbers::pi * x / 5.0);
  CHECK(fourier_interpolate(s, std::span<const double>(&x, 1)) == doctest::Approx(exact).epsilon(1e-10));
  CHECK(std::abs(interpolate_linear(f, 0, std::span<const double>(&x, 1)) - exact) < 1e-3);
  double far = x + 10.0;
  CHECK(interpolate_linear(f, 0, std::span<const double>(&far, 1)) ==
        doctest::Approx(interpolate_linear(f, 0, std::span<const double>(&x, 1))));
  CHECK(wrap(5.0, 5.0) == doctest::Approx(-5.0));
  CHECK(wrap(-5.5, 5.0) == doctest::Approx(4.5));
}
