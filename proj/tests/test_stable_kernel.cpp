#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "besov_mkv/besov.hpp"
#include "besov_mkv/errors.hpp"
#include "besov_mkv/stable_kernel.hpp"
#include "doctest.h"

using namespace besov_mkv;

namespace {

double heat(double x, double t) {
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

}  // namespace

TEST_CASE("alpha = 2 matches the Gaussian with variance 2t") {
  Grid g(1, 10.0, 256);
  for (double t : {0.05, 0.1, 0.25, 0.5, 1.0}) {
    auto p = stable_density(2.0, t, g);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
      err = std::max(err, std::abs(p[i] - heat(g.coordinate(int(i)), t)));
    CHECK(err < (t == 0.25 ? 1e-8 : 1e-6));
  }
}

TEST_CASE("mass and positivity") {
  Grid g(1, 10.0, 1024);
  for (double alpha : {1.2, 1.5, 1.8, 2.0}) {
    for (double t : {0.1, 0.3, 1.0}) {
      auto p = stable_density(alpha, t, g, 1.0);
      CHECK(p.integral() == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
  auto p = stable_density(2.0, 0.5, g);
  CHECK(*std::min_element(p.values().begin(), p.values().end()) > -1e-8);
  Grid g2(2, 8.0, 64);
  CHECK(stable_density(1.7, 0.4, g2, 1.0).integral() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("errors") {
  Grid g(1, 10.0, 256);
  CHECK_THROWS_AS(stable_density(2.0, 0.0, g), DomainError);
  CHECK_THROWS_AS(stable_density(2.0, -1.0, g), DomainError);
  try {
    stable_density(2.0, 1e-5, g);
    FAIL("expected refinement error");
  } catch (const RefinementError& e) {
    CHECK(e.suggested_N > 256);
    Grid fine(1, 10.0, e.suggested_N);
    CHECK_NOTHROW(stable_density(2.0, 1e-5, fine));
  }
  // heavy tail in a small box
  CHECK_THROWS_AS(stable_density(1.5, 1.0, g), RefinementError);
}

TEST_CASE("self-similarity for alpha = 1.5") {
  const double alpha = 1.5, t = 0.25, c = 2.0;
  Grid g(1, 64.0, 2048);
  auto pct = stable_density(alpha, c * t, g, 1.0);
  auto spec_t = to_spectrum(stable_density(alpha, t, g, 1.0));
  const double s = std::pow(c, -1.0 / alpha);
  double err = 0.0;
  for (int i = 0; i < g.N; i += 3) {
    double x = g.coordinate(i);
    if (std::abs(x) > 16.0) continue;
    double y = s * x;
    double rhs = s * fourier_interpolate(spec_t, std::span<const double>(&y, 1));
    err = std::max(err, std::abs(pct[i] - rhs));
  }
  CHECK(err < 1e-5);
}

TEST_CASE("Chapman-Kolmogorov on the grid") {
  for (double alpha : {1.5, 2.0}) {
    // alpha = 1.5 needs a finer grid to resolve t = 0.05
    Grid g(1, 10.0, alpha == 2.0 ? 256 : 1024);
    auto lhs = stable_density(alpha, 0.15, g, 1.0);
    auto rhs = convolve(stable_density(alpha, 0.05, g, 1.0), stable_density(alpha, 0.1, g, 1.0));
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lhs[i] - rhs[i]));
    CHECK(err < 1e-6);
  }
}

TEST_CASE("gradient") {
  Grid g(1, 10.0, 256);
  const double t = 0.3;
  auto dp = grad_stable_density(2.0, t, g);
  auto p = stable_density(2.0, t, g);
  double err = 0.0, fd_err = 0.0, total = 0.0;
  const double h = g.spacing();
  for (int i = 0; i < g.N; ++i) {
    double x = g.coordinate(i);
    err = std::max(err, std::abs(dp[i] + x / (2.0 * t) * heat(x, t)));
    double fd = (p[(i + 1) % g.N] - p[(i + g.N - 1) % g.N]) / (2.0 * h);
    fd_err = std::max(fd_err, std::abs(fd - dp[i]));
    total += dp[i];
  }
  CHECK(err < 1e-7);
  CHECK(std::abs(dp[g.N / 2]) < 1e-14);
  CHECK(std::abs(total * h) < 1e-12);
  // centred differences are second order
  CHECK(fd_err < 0.5 * h * h);
  // odd symmetry
  for (int i = 1; i < g.N / 2; ++i) CHECK(std::abs(dp[g.N / 2 + i] + dp[g.N / 2 - i]) < 1e-12);
}

TEST_CASE("heat-kernel exponents") {
  // Short times sit deep in the singular regime, where the O(1) low-frequency
  // part of the norm no longer masks the power law.
  const std::vector<double> short_times{1e-5, 4e-5, 1.6e-4, 6.4e-4};
  Grid fine(1, 2.0, 4096);
  struct Case {
    BesovSpec spec;
    int a;
    double expect;
  };
  for (const auto& c : {Case{{0.5, kInf, kInf}, 0, -0.75}, Case{{0.5, 2.0, 2.0}, 1, -1.0},
                        Case{{1.0, 1.0, kInf}, 1, -1.0}, Case{{1.0, kInf, kInf}, 0, -1.0}}) {
    CHECK(hk_exponent(2.0, 1, c.spec, c.a, false) == doctest::Approx(c.expect));
    auto fit = verify_hk_exponent(2.0, c.spec, c.a, short_times, fine);
    CHECK(std::abs(fit.slope - c.expect) <= 0.1 * std::abs(c.expect));
  }
  SUBCASE("clipped positive part") {
    Grid g(1, 10.0, 2048);
    BesovSpec spec{-0.5, 1.0, kInf};
    auto fit = verify_hk_exponent(2.0, spec, 0, {0.001, 0.002, 0.004, 0.008}, g);
    CHECK(hk_exponent(2.0, 1, spec, 0, false) == 0.0);
    CHECK(std::abs(fit.slope) < 0.05);
  }
  SUBCASE("long time") {
    Grid g(1, 128.0, 512);
    const std::vector<double> times{8.0, 16.0, 32.0, 64.0};
    for (const auto& c : {Case{{0.0, 1.0, kInf}, 1, -0.5}, Case{{0.0, 2.0, kInf}, 0, -0.25}}) {
      CHECK(hk_exponent(2.0, 1, c.spec, c.a, true) == doctest::Approx(c.expect));
      auto fit = verify_hk_exponent(2.0, c.spec, c.a, times, g);
      CHECK(std::abs(fit.slope - c.expect) <= 0.15 * std::abs(c.expect));
    }
  }
  CHECK_THROWS(verify_hk_exponent(2.0, {0.0, 1.0, 1.0}, 0, {0.1, 0.2}, Grid(1, 4.0, 64)));
}

TEST_CASE("increments") {
  SUBCASE("Gaussian variance and symmetry") {
    Rng rng(1);
    const int n = 1000000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = sample_stable_increment(2.0, 1.0, 1, rng)[0];
      s += x;
      ss += x * x;
    }
    double mean = s / n, var = ss / n - mean * mean;
    CHECK(std::abs(var - 2.0) < 0.02);
    CHECK(std::abs(mean) < 4.0 * std::sqrt(2.0 / n));
  }
  SUBCASE("stable scaling") {
    const int n = 100000;
    for (double alpha : {1.5, 2.0}) {
      Rng a(7), b(8);
      std::vector<double> x1, x2;
      for (int i = 0; i < n; ++i) {
        x1.push_back(sample_stable_increment(alpha, 2.0, 1, a)[0]);
        x2.push_back(std::pow(2.0, 1.0 / alpha) * sample_stable_increment(alpha, 1.0, 1, b)[0]);
      }
      // p > 0.01 for equal sample sizes
      CHECK(ks_statistic(x1, x2) * std::sqrt(n / 2.0) < 1.628);
    }
  }
  SUBCASE("characteristic function") {
    const int n = 400000;
    for (int d : {1, 2}) {
      for (double alpha : {1.3, 1.5, 1.8}) {
        Rng rng(100 + d);
        double xi = 0.8;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          auto inc = sample_stable_increment(alpha, 1.0, d, rng);
          acc += std::cos(xi * (d == 1 ? inc[0] : (inc[0] + inc[1]) / std::sqrt(2.0)));
        }
        CHECK(std::abs(acc / n - std::exp(-std::pow(xi, alpha))) < 5.0 / std::sqrt(n));
      }
    }
  }
  SUBCASE("stable mean is symmetric") {
    Rng rng(3);
    const int n = 1000000;
    // heavy tails: use the median of signs instead of the mean
    int pos_count = 0;
    for (int i = 0; i < n; ++i) pos_count += sample_stable_increment(1.5, 1.0, 1, rng)[0] > 0.0;
    CHECK(std::abs(pos_count / double(n) - 0.5) < 4.0 * 0.5 / std::sqrt(n));
  }
}
