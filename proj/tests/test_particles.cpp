#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "besov_mkv/errors.hpp"
#include "besov_mkv/fokker_planck.hpp"
#include "besov_mkv/kernels.hpp"
#include "besov_mkv/parallel.hpp"
#include "besov_mkv/particles.hpp"
#include "doctest.h"

using namespace besov_mkv;

namespace {

double gaussian(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

double periodic_gaussian(double x, double var, double L) {
  double v = 0.0;
  for (int k = -3; k <= 3; ++k) v += gaussian(x + 2.0 * L * k, var);
  return v;
}

GridFunction gaussian_mu(const Grid& g) {
  return GridFunction::sample(g, [](auto x) { return gaussian(x[0], 0.25); });
}

SolverConfig config(double alpha, double dt) {
  SolverConfig c;
  c.alpha = alpha;
  c.dt = dt;
  return c;
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

const Grid kGrid(1, 5.0, 512);
constexpr double kS = 0.25;
constexpr double kDt = kS / 128.0;

}  // namespace

TEST_CASE("initial sampling") {
  auto mu = gaussian_mu(kGrid);
  auto e = sample_initial(mu, 100000, 2.0, 1);
  REQUIRE(e.size() == 100000);
  double m = 0.0, v = 0.0;
  for (double x : e.positions) m += x;
  m /= e.positions.size();
  for (double x : e.positions) v += (x - m) * (x - m);
  v /= e.positions.size();
  CHECK(std::abs(m) < 0.01);
  CHECK(v == doctest::Approx(0.25).epsilon(0.02));
  CHECK(sample_initial(mu, 1000, 2.0, 1).positions == sample_initial(mu, 1000, 2.0, 1).positions);
  CHECK_THROWS_AS(sample_initial(GridFunction(kGrid), 100, 2.0, 1), DomainError);
}

TEST_CASE("empirical density") {
  const double h = kGrid.spacing(), bw = 4.0 * h;
  const double x0 = kGrid.coordinate(300);
  auto one = empirical_density({x0}, 1, kGrid, bw);
  double err = 0.0, peak = 0.0;
  for (int i = 0; i < kGrid.N; ++i) {
    double want = periodic_gaussian(kGrid.coordinate(i) - x0, bw * bw, kGrid.L);
    peak = std::max(peak, want);
    err = std::max(err, std::abs(one[i] - want));
  }
  CHECK(err < 1e-6 * peak);

  auto e = sample_initial(gaussian_mu(kGrid), 5000, 2.0, 3);
  CHECK(empirical_density(e.positions, 1, kGrid, 2.0 * h).integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(empirical_density(e.positions, 1, kGrid, 0.0).integral() == doctest::Approx(1.0).epsilon(1e-12));
  // a particle one box width away lands in the same place
  auto shifted = empirical_density({x0 + 2.0 * kGrid.L}, 1, kGrid, bw);
  double s = 0.0;
  for (int i = 0; i < kGrid.N; ++i) s = std::max(s, std::abs(shifted[i] - one[i]));
  CHECK(s < 1e-10 * peak);
  CHECK_THROWS(empirical_density({}, 1, kGrid, bw));
  CHECK_THROWS(empirical_density({0.0, 0.0}, 2, kGrid, bw));
}

TEST_CASE("Brownian particles without drift") {
  auto mu = gaussian_mu(kGrid);
  auto zero = zero_kernel(kGrid, 0.0, kS);
  auto traj = simulate(zero, mu, 2.0, 0.0, kS, 100000, kDt, 9);
  REQUIRE(traj.times.size() == 129);
  auto path = solve_mollified_fp(zero, mu, 0.0, kS, config(2.0, kDt));
  auto sum = summarize_trajectory(traj, path, 2.0 * kGrid.spacing());
  for (std::size_t k = 16; k < sum.s.size(); k += 16)
    CHECK(sum.var[k] - sum.var[0] == doctest::Approx(2.0 * sum.s[k]).epsilon(0.03));

  SUBCASE("distance to the heat flow") {
    const double bw = 2.0 * kGrid.spacing();
    CHECK(compare_to_fp(traj, path, bw).back() <= 0.03);
    std::vector<double> dist;
    for (std::size_t N : {1000u, 10000u, 100000u})
      dist.push_back(compare_to_fp(simulate(zero, mu, 2.0, 0.0, kS, N, kDt, 9), path, bw).back());
    CHECK(dist[1] < dist[0]);
    CHECK(dist[2] < dist[1]);
  }
  SUBCASE("exchangeability") {
    const auto& last = traj.positions.back();
    std::vector<double> a(last.begin(), last.begin() + 50000), b(last.begin() + 50000, last.end());
    // 5% critical value of the two-sample test
    CHECK(ks_statistic(a, b) < 1.36 * std::sqrt(2.0 / 50000.0));
    std::vector<double> odd, even;
    for (std::size_t i = 0; i < last.size(); ++i) (i % 2 ? odd : even).push_back(last[i]);
    CHECK(ks_statistic(odd, even) < 1.36 * std::sqrt(2.0 / 50000.0));
  }
  SUBCASE("tightness: E|dX|^4 grows like lag^2") {
    auto t = tightness_moments(traj, 4.0, {1, 2, 4, 8});
    CHECK(t.slope == doctest::Approx(2.0).epsilon(0.1));
    CHECK(t.passes);
    auto z = tightness_moments(traj, 4.0, {0, 1, 2});
    CHECK(z.moments[0] == 0.0);
  }
  SUBCASE("pathwise probe vanishes without drift") {
    auto gap = pathwise_probe_d1(zero, mu, 2.0, 0.0, kS, 500, kDt, 0.1, 4);
    for (double v : gap) CHECK(v == 0.0);
  }
}

TEST_CASE("stable particles") {
  const double alpha = 1.5, S = 0.5, dt = 1.0 / 64.0;
  auto mu = gaussian_mu(kGrid);
  KernelSpec k;
  k.amplitude = 1e-2;
  auto b = mollify(synthesize_time_kernel(k, kGrid, 0.0, S), 0.05);
  auto path = solve_mollified_fp(b, mu, 0.0, S, config(alpha, dt));
  auto traj = simulate(b, mu, alpha, 0.0, S, 100000, dt, 21);
  CHECK(compare_to_fp(traj, path, 2.0 * kGrid.spacing()).back() <= 0.05);

  auto t = tightness_moments(traj, 1.0, {1, 2, 4, 8});
  CHECK(t.slope == doctest::Approx(1.0 / alpha).epsilon(0.15));
  CHECK(t.passes);
}

TEST_CASE("determinism across thread counts") {
  auto mu = gaussian_mu(kGrid);
  KernelSpec k;
  k.amplitude = 1e-2;
  auto b = mollify(synthesize_time_kernel(k, kGrid, 0.0, kS), 0.05);
  std::vector<std::vector<double>> finals;
  std::vector<std::vector<double>> kde;
  for (int threads : {1, 3, 4}) {
    set_thread_count(threads);
    auto traj = simulate(b, mu, 2.0, 0.0, kS, 2000, kDt, 17);
    finals.push_back(traj.positions.back());
    kde.push_back(empirical_density(traj.positions.back(), 1, kGrid, 0.02).values());
  }
  set_thread_count(1);
  CHECK(finals[0] == finals[1]);
  CHECK(finals[0] == finals[2]);
  CHECK(kde[0] == kde[1]);
  CHECK(kde[0] == kde[2]);
}

TEST_CASE("simulation refusals and instability") {
  auto mu = gaussian_mu(kGrid);
  auto zero = zero_kernel(kGrid, 0.0, kS);
  CHECK_THROWS_AS(simulate(zero, mu, 2.0, 0.0, kS, 99, kDt, 1), DomainError);
  CHECK_THROWS_AS(simulate(zero, mu, 2.0, 0.0, kS, 100, 0.0, 1), DomainError);
  KernelSpec huge;
  huge.family = KernelFamily::gradient_potential;
  huge.amplitude = 1e6;
  auto b = synthesize_time_kernel(huge, kGrid, 0.0, kS);
  CHECK_THROWS_AS(simulate(b, mu, 2.0, 0.0, kS, 200, kDt, 1), NumericError);
}

TEST_CASE("Young reconstruction") {
  auto mu = gaussian_mu(kGrid);
  auto zero = zero_kernel(kGrid, 0.0, kS);
  auto path = solve_mollified_fp(zero, mu, 0.0, kS, config(2.0, kDt));
  auto traj = simulate(zero, mu, 2.0, 0.0, kS, 300, kDt, 2);
  std::vector<double> part;
  for (int j = 0; j <= 128; j += 8) part.push_back(j * kDt);
  auto y = young_reconstruction(zero, path, traj, part);
  CHECK(y.gap == 0.0);
  for (double v : y.riemann_sum) CHECK(v == 0.0);

  CHECK_THROWS_AS(young_reconstruction(zero, path, traj, {0.0}), RefusedError);
  CHECK_THROWS_AS(young_reconstruction(zero, path, traj, {0.0, 0.5 * kDt}), RefusedError);
  CHECK_THROWS_AS(young_reconstruction(zero, path, traj, {8 * kDt, 0.0}), RefusedError);

  SUBCASE("smooth drift: refining the partition closes the gap") {
    KernelSpec sm;
    sm.family = KernelFamily::gradient_potential;
    sm.amplitude = 0.5;
    auto b = synthesize_time_kernel(sm, kGrid, 0.0, kS);
    auto bp = solve_mollified_fp(b, mu, 0.0, kS, config(2.0, kDt));
    auto bt = simulate(b, mu, 2.0, 0.0, kS, 500, kDt, 2);
    std::vector<double> gaps;
    for (int step : {16, 4, 1}) {
      std::vector<double> p;
      for (int j = 0; j <= 128; j += step) p.push_back(j * kDt);
      gaps.push_back(young_reconstruction(b, bp, bt, p).gap);
    }
    CHECK(gaps[1] < gaps[0]);
    CHECK(gaps[2] < gaps[1]);
  }
}
