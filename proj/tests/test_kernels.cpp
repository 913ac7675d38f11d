#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "besov_mkv/besov.hpp"
#include "besov_mkv/errors.hpp"
#include "besov_mkv/kernels.hpp"
#include "doctest.h"

using namespace besov_mkv;

namespace {

double sup(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double gaussian(double x, double var) {
  return std::exp(-x * x / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Centred second-order differences of a periodic 1d field.
GridFunction centred_derivative(const GridFunction& f) {
  const Grid& g = f.grid();
  GridFunction out(g);
  for (int i = 0; i < g.N; ++i)
    out[i] = (f[(i + 1) % g.N] - f[(i + g.N - 1) % g.N]) / (2.0 * g.spacing());
  return out;
}

}  // namespace

TEST_CASE("spec validation and refusals") {
  KernelSpec k;
  CHECK_NOTHROW(k.validate());
  k.beta = -2.1;
  CHECK_THROWS_AS(k.validate(), DomainError);
  k = {};
  k.slabs = 9;
  CHECK_THROWS_AS(k.validate(), DomainError);
  k = {};
  CHECK_THROWS_AS(synthesize_kernel(k, Grid(1, 5.0, 32)), RefusedError);
  CHECK_THROWS(parse_kernel_family("bogus"));
  for (auto f : {KernelFamily::random_fourier, KernelFamily::fractional_derivative_gaussian,
                 KernelFamily::gradient_potential})
    CHECK(parse_kernel_family(to_string(f)) == f);
}

TEST_CASE("synthesis is deterministic and keyed by wavevector") {
  Grid g(1, 5.0, 256);
  KernelSpec k;
  k.seed = 42;
  auto a = synthesize_kernel(k, g), b = synthesize_kernel(k, g);
  CHECK(a.values() == b.values());
  k.seed = 43;
  CHECK(synthesize_kernel(k, g).values() != a.values());

  // refinement keeps the coarse coefficients
  k.seed = 42;
  auto fine = synthesize_kernel(k, Grid(1, 5.0, 512));
  auto sc = to_spectrum(a), sf = to_spectrum(fine);
  for (int m = 1; m < 100; ++m) {
    CHECK(std::abs(sc[m] - sf[m]) < 1e-9 * std::abs(sf[m]) + 1e-12);
    CHECK(std::abs(sc[256 - m] - sf[512 - m]) < 1e-9 * std::abs(sf[512 - m]) + 1e-12);
  }
  // real and mean free
  CHECK(std::abs(a.integral()) < 1e-10);

  SUBCASE("time slabs") {
    k.slabs = 4;
    auto tk = synthesize_time_kernel(k, g, 0.0, 1.0);
    REQUIRE(tk.slabs.size() == 4);
    CHECK(tk.slabs[0].values() == a.values());
    CHECK(tk.slabs[1].values() != tk.slabs[0].values());
    CHECK(&tk.at(0.0) == &tk.slabs[0]);
    CHECK(&tk.at(0.3) == &tk.slabs[1]);
    CHECK(&tk.at(0.99) == &tk.slabs[3]);
    CHECK(&tk.at(1.0) == &tk.slabs[3]);
  }
}

TEST_CASE("closed forms of the deterministic families") {
  SUBCASE("gradient potential is minus the gradient of exp(-x^2 / 2w^2)") {
    Grid g(1, 5.0, 512);
    KernelSpec k;
    k.family = KernelFamily::gradient_potential;
    k.width = 0.5;
    k.amplitude = 0.7;
    auto b = synthesize_kernel(k, g);
    double err = 0.0;
    for (int i = 0; i < g.N; ++i) {
      double x = g.coordinate(i);
      err = std::max(err, std::abs(b[i] - 0.7 * x / 0.25 * std::exp(-x * x / 0.5)));
    }
    CHECK(err < 1e-10);
  }
  SUBCASE("fractional derivative at beta = 0 is sign(x) exp(-|x|/w) / 2") {
    Grid g(1, 10.0, 4096);
    KernelSpec k;
    k.family = KernelFamily::fractional_derivative_gaussian;
    k.beta = 0.0;
    k.width = 0.5;
    auto b = synthesize_kernel(k, g);
    double err = 0.0;
    for (int i = 0; i < g.N; ++i) {
      double x = g.coordinate(i);
      if (std::abs(x) < 1.0 || std::abs(x) > 4.0) continue;
      double want = 0.5 * (x > 0 ? 1.0 : -1.0) * std::exp(-std::abs(x) / 0.5);
      err = std::max(err, std::abs(b[i] - want));
    }
    // the jump at the origin leaves an O(h) Gibbs tail
    CHECK(err < 2e-3);
  }
}

TEST_CASE("regularity probe") {
  Grid coarse(1, 5.0, 256);
  KernelSpec k;
  k.beta = -1.9;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    k.seed = seed;
    auto rough = regularity_probe(k, coarse, k.beta + 0.3, 2.0);
    auto fine = regularity_probe(k, coarse, k.beta - 0.1, 2.0);
    CHECK(rough.slope > 0.0);
    CHECK(rough.diverged);
    CHECK(fine.slope <= 0.02);
    CHECK_FALSE(fine.diverged);
  }
  KernelSpec smooth;
  smooth.family = KernelFamily::gradient_potential;
  for (double beta : {-1.9, -1.0, -0.2}) {
    smooth.beta = beta;
    CHECK_FALSE(regularity_probe(smooth, coarse, beta, 2.0).diverged);
  }
  SUBCASE("two dimensions") {
    KernelSpec k2;
    auto p = regularity_probe(k2, Grid(2, 5.0, 64), k2.beta + 0.3, 2.0);
    CHECK(p.slope > 0.0);
  }
}

TEST_CASE("divergence") {
  SUBCASE("constant field") {
    Grid g(2, 4.0, 64);
    GridFunction c(g, 2);
    for (auto& v : c.values()) v = 3.0;
    CHECK(sup(divergence(c)) < 1e-12);
  }
  SUBCASE("curl of a stream function") {
    Grid g(2, 6.0, 64);
    // psi = exp(-|x|^2), field (-d2 psi, d1 psi)
    GridFunction b(g, 2);
    for (int i = 0; i < g.N; ++i)
      for (int j = 0; j < g.N; ++j) {
        double x = g.coordinate(i), y = g.coordinate(j);
        double psi = std::exp(-(x * x + y * y));
        b.component(0)[i * g.N + j] = 2.0 * y * psi;
        b.component(1)[i * g.N + j] = -2.0 * x * psi;
      }
    CHECK(sup(divergence(b)) < 1e-10);
  }
  SUBCASE("random Fourier field in 2d is solenoidal") {
    KernelSpec k;
    auto b = synthesize_kernel(k, Grid(2, 5.0, 64));
    CHECK(sup(divergence(b)) < 1e-10 * sup(b));
  }
  SUBCASE("gradient potential: divergence is the Laplacian of the potential") {
    Grid g(1, 5.0, 512);
    KernelSpec k;
    k.family = KernelFamily::gradient_potential;
    auto d = divergence(synthesize_kernel(k, g));
    double err = 0.0;
    for (int i = 0; i < g.N; ++i) {
      double x = g.coordinate(i);
      // -(exp(-x^2 / 2w^2))'' with w = 0.5
      double want = (4.0 - 16.0 * x * x) * std::exp(-2.0 * x * x);
      err = std::max(err, std::abs(d[i] - want));
    }
    CHECK(err < 1e-9);
  }
  SUBCASE("band-limited random field matches centred differences to second order") {
    KernelSpec k;
    k.cutoff = 4.0;
    std::vector<double> errs;
    for (int N : {128, 256, 512}) {
      auto b = synthesize_kernel(k, Grid(1, 5.0, N));
      errs.push_back(sup(divergence(b) - centred_derivative(b)));
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(errs[1] / errs[2] == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("mollifier") {
  Grid g(1, 5.0, 512);
  KernelSpec k;
  k.seed = 5;
  auto b = synthesize_kernel(k, g);
  b += GridFunction(g, 1, std::vector<double>(g.size(), 0.3));
  CHECK_THROWS_AS(mollify(b, 0.0), DomainError);

  for (double eps : {0.4, 0.1, 0.01}) {
    auto m = mollify(b, eps);
    CHECK(std::abs(m.integral() - b.integral()) < 1e-12);
    CHECK(sup(divergence(m) - mollify(divergence(b), eps)) < 1e-12 * sup(divergence(b)));
  }

  SUBCASE("Gaussian oracle") {
    auto f = GridFunction::sample(g, [](auto x) { return gaussian(x[0], 0.3); });
    for (double eps : {0.05, 0.2}) {
      auto m = mollify(f, eps);
      double err = 0.0;
      for (int i = 0; i < g.N; ++i) err = std::max(err, std::abs(m[i] - gaussian(g.coordinate(i), 0.3 + eps * eps)));
      CHECK(err < 1e-12);
    }
    // O(eps^2) in L2
    std::vector<double> d;
    for (double eps : {0.1, 0.05, 0.025}) d.push_back(lp_norm(f - mollify(f, eps), 2.0));
    CHECK(d[0] / d[1] == doctest::Approx(4.0).epsilon(0.02));
    CHECK(d[1] / d[2] == doctest::Approx(4.0).epsilon(0.02));
  }

  SUBCASE("report") {
    KernelSpec bl = k;
    bl.cutoff = 6.0;
    auto band = synthesize_kernel(bl, g);
    auto rep = mollifier_report(band, bl, {0.4, 0.2, 0.1}, {}, 2.0);
    CHECK(rep.sup_norm_ratio <= 1.0 + 1e-6);
    CHECK(rep.warnings.empty());

    // Once eps is below the grid spacing every halving at least halves the difference.
    const double h = g.spacing();
    auto fine = mollifier_report(b, k, {2 * h, h, h / 2, h / 4, h / 8}, {-1.95}, 2.0);
    CHECK(fine.warnings.size() == 3);
    const auto& row = fine.convergence_table[0];
    CHECK(row[1] < row[0]);
    for (std::size_t i = 3; i < row.size(); ++i) CHECK(row[i] <= 0.5 * row[i - 1]);
    CHECK(mollifier_resolved(g, h));
    CHECK_FALSE(mollifier_resolved(g, 0.5 * h));
  }
}
