#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace besov_mkv {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Every scalar symbol of the condition algebra. Integrability exponents
/// may be +infinity (kInf).
struct ParameterSet {
  double alpha = 2.0;
  int d = 1;
  double r = kInf;
  double p = kInf;
  double q = kInf;
  double beta = -1.9;
  double beta0 = 0.0;
  double p0 = 1.0;
  double q0 = kInf;
  double theta = 0.0;
  double theta_bar = kInf;
  double eta = 1e-2;
  double delta = 1e-2;
  double delta_prime = 1e-2;
  /// Slack of the long-time chain alpha (1 - 1/r) <= 2 - eps.
  double eps_lt = 1e-2;
};

/// Throws DomainError if the invariants of ParameterSet are violated.
void validate(const ParameterSet& ps);

struct ConditionReport {
  std::string condition_name;
  bool satisfied = false;
  double margin = 0.0;
  std::vector<std::string> violated_clauses;
};

/// p' with 1/p + 1/p' = 1; 1 -> inf, inf -> 1.
double conjugate_exponent(double p);

/// Positive part.
inline double pos(double x) { return x > 0.0 ? x : 0.0; }

/// d / p with d / inf = 0.
double ratio(double d, double p);

/// 1 ∧ p0'/p, using p0'/p = 1 when both are infinite.
double initial_integrability_factor(const ParameterSet& ps);

double zeta0(const ParameterSet& ps);
double beta0_bar(const ParameterSet& ps);

ConditionReport check_C3(const ParameterSet& ps);
ConditionReport check_MS(const ParameterSet& ps);
ConditionReport check_WS(const ParameterSet& ps);
ConditionReport check_C3LT(const ParameterSet& ps);
ConditionReport check_C2star(const ParameterSet& ps);
ConditionReport check_C2star_strong(const ParameterSet& ps);

/// Dispatch by name: C3, MS, WS, C3LT, C2star, C2star_strong.
ConditionReport check_condition(const std::string& name, const ParameterSet& ps);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = true;
  bool hi_closed = false;

  bool contains(double x) const {
    return (lo_closed ? x >= lo : x > lo) && (hi_closed ? x <= hi : x < hi);
  }
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// Values of theta in [0, 1/2) satisfying C3 and MS jointly, ps.theta ignored.
/// The excluded point of C3 (beta = -theta - beta0_bar + d/p) is reported in
/// `excluded` rather than splitting the interval.
struct ThetaInterval {
  Interval interval;
  std::optional<double> excluded;
};
std::optional<ThetaInterval> feasible_theta_interval(const ParameterSet& ps);

struct DerivedQuantities {
  double zeta0 = 0.0;
  double beta0_bar = 0.0;
  double p0_bar = 0.0;
  double q0_bar = 0.0;
  double gamma0 = 0.0;
  double gamma = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double Gamma_cl = 0.0;
  double gamma_star = 0.0;
  /// Admissible r_theta for the martingale regime: (alpha, r / (1 + r gamma)).
  Interval r_theta_range;
  /// Singular exponent of the Gronwall drift coefficient:
  /// 1 - 1/r - gamma + (beta - delta) / alpha.
  double drift_exponent = 0.0;
  /// gamma - 1 + 1/r - (beta - delta + eta) / alpha; must be negative.
  double horizon_denominator = 0.0;
  bool feasible = true;
  std::vector<std::string> flags;
};

DerivedQuantities gamma_exponents(const ParameterSet& ps);

/// (4 C0 Cb)^(1 / denom); denom must be negative.
double time_horizon(double C0, double Cb, double exponent_denom);

/// Long-time horizon: the short-time horizon when ||mu|| >= gate, T otherwise.
double time_horizon_longtime(double horizon_short, double T, double mu_norm, double gate);

/// Roots of c_b x^2 - x + c_mu when c_mu c_b < 1/4. With c_b = 0 the lower
/// root is c_mu and the upper root is infinite.
std::optional<std::pair<double, double>> gronwall_roots(double c_mu, double c_b);

}  // namespace besov_mkv
