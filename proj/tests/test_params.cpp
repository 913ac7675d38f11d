#include <cmath>
#include <random>

#include "besov_mkv/errors.hpp"
#include "besov_mkv/params.hpp"
#include "doctest.h"

using namespace besov_mkv;

namespace {

ParameterSet example_short(double beta0) {
  ParameterSet ps;
  ps.alpha = 2.0;
  ps.d = 1;
  ps.r = ps.p = ps.q = kInf;
  ps.beta = -1.9;
  ps.beta0 = beta0;
  ps.p0 = 1.0;
  ps.theta = 0.44;
  return ps;
}

bool brute_ok(ParameterSet ps, double theta) {
  ps.theta = theta;
  return check_C3(ps).satisfied && check_MS(ps).satisfied;
}

}  // namespace

TEST_CASE("conjugate exponent") {
  CHECK(std::isinf(conjugate_exponent(1.0)));
  CHECK(conjugate_exponent(kInf) == 1.0);
  CHECK(conjugate_exponent(2.0) == 2.0);
  CHECK(conjugate_exponent(4.0) == doctest::Approx(4.0 / 3.0));
  CHECK_THROWS_AS(conjugate_exponent(0.5), DomainError);
}

TEST_CASE("zeta0") {
  auto ps = example_short(1.5);
  CHECK(zeta0(ps) == doctest::Approx(1.5));
  ps.beta0 = 0.0;
  CHECK(zeta0(ps) == 0.0);
  ps.beta0 = 2.4;
  ps.p = 1.0;
  CHECK(zeta0(ps) == doctest::Approx(2.4));
  // replacing infinity by a large finite value barely moves the result
  for (double p0 : {1.0, 2.0, 3.0}) {
    for (int d : {1, 2}) {
      ParameterSet a = example_short(0.7);
      a.d = d;
      a.p0 = p0;
      ParameterSet b = a;
      b.p = 1e9;
      CHECK(std::abs(zeta0(a) - zeta0(b)) < 1e-6);
    }
  }
}

TEST_CASE("C3 clauses") {
  auto ps = example_short(1.45);
  auto rep = check_C3(ps);
  CHECK(rep.satisfied);
  // slacks 0.09, 0.02, 0.01
  CHECK(rep.margin == doctest::Approx(0.01));
  ps.beta0 = 0.0;
  rep = check_C3(ps);
  CHECK_FALSE(rep.satisfied);
  REQUIRE(rep.violated_clauses.size() == 1);
  CHECK(rep.violated_clauses[0].find("beta >") == 0);
  ps = example_short(1.45);
  ps.theta = 0.0;
  ps.beta = -1.0;
  rep = check_C3(ps);
  CHECK_FALSE(rep.satisfied);
  bool found = false;
  for (auto& c : rep.violated_clauses) found |= c == "beta < -1 - 2 theta";
  CHECK(found);
  // exclusion point
  ps = example_short(1.45);
  ps.beta0 = -ps.theta + 0.0 - ps.beta;
  CHECK_FALSE(check_C3(ps).satisfied);
}

TEST_CASE("MS and WS") {
  auto ps = example_short(1.45);
  CHECK(check_MS(ps).satisfied);
  ps.r = 4.0;
  CHECK_FALSE(check_WS(ps).satisfied);
  ps.alpha = 1.5;
  ps.r = 3.0;
  ps.theta = 0.0;
  CHECK_FALSE(check_MS(ps).satisfied);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ua(1.05, 2.0), ur(1.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    ParameterSet q;
    q.alpha = ua(rng);
    q.r = ur(rng);
    q.theta = 0.0;
    if (check_WS(q).satisfied) CHECK(q.r > q.alpha / (q.alpha - 1.0));
  }
}

TEST_CASE("C3LT") {
  ParameterSet ps;
  ps.alpha = 1.9;
  ps.r = kInf;
  ps.p = 1.0;
  CHECK(check_C3LT(ps).satisfied);
  ps.alpha = 2.0;
  CHECK_FALSE(check_C3LT(ps).satisfied);
  ps.r = 2.0;
  CHECK_FALSE(check_C3LT(ps).satisfied);
}

TEST_CASE("C2star and strong variant") {
  ParameterSet ps;
  ps.alpha = 2.0;
  ps.beta = -1.9;
  ps.beta0 = 2.0 * 0.9 + 0.01;
  ps.p0 = 1.0;
  CHECK(check_C2star(ps).satisfied);
  ps.beta = -1.5;
  ps.beta0 = 0.0;
  CHECK_FALSE(check_C2star(ps).satisfied);
  ps.beta = -1.0;
  ps.beta0 = 1.0;
  auto rep = check_C2star(ps);
  CHECK(rep.satisfied);
  CHECK(rep.margin == doctest::Approx(1.0));
  // strong variant implies the plain one
  CHECK((!check_C2star_strong(ps).satisfied || rep.satisfied));
}

TEST_CASE("feasible theta interval agrees with a brute-force scan") {
  auto ps = example_short(1.45);
  auto iv = feasible_theta_interval(ps);
  REQUIRE(iv);
  CHECK(iv->interval.lo == doctest::Approx(0.35));
  CHECK(iv->interval.hi == doctest::Approx(0.45));
  ps = example_short(1.40);
  iv = feasible_theta_interval(ps);
  REQUIRE(iv);
  CHECK(iv->interval.lo >= 0.4 - 1e-12);
  CHECK(iv->interval.hi <= 0.45 + 1e-12);

  ParameterSet deg;
  deg.alpha = 2.0;
  deg.r = 2.0;
  CHECK_FALSE(feasible_theta_interval(deg));

  // large beta0: positive part vanishes, only upper bounds remain
  ps = example_short(5.0);
  iv = feasible_theta_interval(ps);
  REQUIRE(iv);
  CHECK(iv->interval.lo == 0.0);
  CHECK(iv->interval.lo_closed);
  CHECK(iv->interval.hi == doctest::Approx(0.45));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ua(1.2, 2.0), ub(-2.0, -1.0), ub0(0.0, 3.0), ur(0.0, 1.0);
  int nonempty = 0;
  for (int draw = 0; draw < 100; ++draw) {
    ParameterSet q;
    q.alpha = ua(rng);
    q.r = ur(rng) < 0.3 ? kInf : 2.0 + 40.0 * ur(rng);
    q.p = ur(rng) < 0.5 ? kInf : 1.0 + 4.0 * ur(rng);
    q.d = ur(rng) < 0.5 ? 1 : 2;
    q.beta = ub(rng);
    q.beta0 = ub0(rng);
    q.p0 = 1.0 + ur(rng);
    auto res = feasible_theta_interval(q);
    for (int k = 0; k < 5000; ++k) {
      double th = k * 1e-4;
      bool brute = brute_ok(q, th);
      bool analytic = res && res->interval.contains(th) &&
                      !(res->excluded && std::abs(*res->excluded - th) <= 1e-12);
      if (brute != analytic) {
        INFO("draw " << draw << " theta " << th);
        CHECK(brute == analytic);
      }
    }
    nonempty += res.has_value();
  }
  CHECK(nonempty > 5);
}

TEST_CASE("gamma exponents") {
  auto ps = example_short(1.45);
  ps.eta = 0.02;
  auto dq = gamma_exponents(ps);
  CHECK(dq.gamma0 == doctest::Approx(0.005));
  CHECK(dq.gamma == doctest::Approx(0.015));
  CHECK(dq.gamma1 == dq.gamma);
  CHECK(dq.gamma2 == doctest::Approx(0.5));
  bool flagged = false;
  for (auto& f : dq.flags) flagged |= f.find("C3LT") != std::string::npos;
  CHECK(flagged);
  ps.beta0 = 5.0;
  dq = gamma_exponents(ps);
  CHECK(dq.gamma == doctest::Approx(ps.eta / ps.alpha));
}

TEST_CASE("time horizon") {
  CHECK(time_horizon(0.5, 0.5, -3.0) == doctest::Approx(1.0));
  CHECK(time_horizon(0.25, 0.5, -2.0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(time_horizon(10.0, 10.0, -2.0) < time_horizon(1.0, 10.0, -2.0));
  CHECK(time_horizon(10.0, 10.0, -2.0) < 1.0);
  CHECK_THROWS_AS(time_horizon(1.0, 1.0, 0.0), DomainError);
  CHECK(time_horizon_longtime(0.3, 5.0, 1.0, 0.5) == 0.3);
  CHECK(time_horizon_longtime(0.3, 5.0, 0.1, 0.5) == 5.0);
}

TEST_CASE("Gronwall roots") {
  auto r = gronwall_roots(0.0, 2.0);
  REQUIRE(r);
  CHECK(r->first == 0.0);
  CHECK(r->second == doctest::Approx(0.5));
  CHECK_FALSE(gronwall_roots(0.5, 0.5));
  r = gronwall_roots(0.1, 0.5);
  REQUIRE(r);
  // roots of 0.5 x^2 - x + 0.1
  CHECK(r->first == doctest::Approx(1.0 - std::sqrt(0.8)).epsilon(1e-12));
  CHECK(r->second == doctest::Approx(1.0 + std::sqrt(0.8)).epsilon(1e-12));
  CHECK_THROWS_AS(gronwall_roots(-1.0, 0.1), DomainError);
  auto b0 = gronwall_roots(0.3, 0.0);
  REQUIRE(b0);
  CHECK(b0->first == 0.3);

  // residual of the quadratic and Newton refinement cross-check
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double prev_lower = -1.0;
  for (int i = 0; i < 500; ++i) {
    double cb = 0.01 + 3.0 * u(rng);
    double cm = u(rng) * 0.2499 / cb;
    auto rr = gronwall_roots(cm, cb);
    REQUIRE(rr);
    for (double x : {rr->first, rr->second}) {
      double res = cb * x * x - x + cm;
      CHECK(std::abs(res) <= 1e-12 * std::max({1.0, cb * x * x, x}));
    }
    double x = 0.0;
    for (int it = 0; it < 200; ++it) x -= (cb * x * x - x + cm) / (2.0 * cb * x - 1.0);
    CHECK(rr->first == doctest::Approx(x).epsilon(1e-9));
  }
  for (int i = 0; i <= 100; ++i) {
    auto rr = gronwall_roots(i * 0.0024, 1.0);
    REQUIRE(rr);
    CHECK(rr->first >= prev_lower);
    prev_lower = rr->first;
  }
}
