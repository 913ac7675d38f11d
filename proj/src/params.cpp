#include "besov_mkv/params.hpp"

#include <algorithm>
#include <cmath>

#include "besov_mkv/errors.hpp"

namespace besov_mkv {

namespace {

constexpr double kExclusionTol = 1e-12;

// Accumulates clause slacks into a report. Strict clauses need slack > 0,
// non-strict ones slack >= 0.
class ClauseSet {
 public:
  explicit ClauseSet(std::string name) { report_.condition_name = std::move(name); }

  void strict(const std::string& label, double slack) { add(label, slack, slack > 0.0, true); }
  void non_strict(const std::string& label, double slack) {
    add(label, slack, slack >= 0.0, false);
  }

  ConditionReport finish() {
    report_.satisfied = report_.violated_clauses.empty();
    report_.margin = report_.satisfied ? strict_min_ : std::min(strict_min_, all_min_);
    return report_;
  }

 private:
  void add(const std::string& label, double slack, bool ok, bool is_strict) {
    if (std::isnan(slack)) ok = false;
    if (!ok) report_.violated_clauses.push_back(label);
    if (is_strict) strict_min_ = std::min(strict_min_, slack);
    all_min_ = std::min(all_min_, slack);
  }

  ConditionReport report_;
  double strict_min_ = kInf;
  double all_min_ = kInf;
};

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// (-theta - beta + d/p - zeta0), before the positive part.
double c3_excess(const ParameterSet& ps, double theta) {
  return -theta - ps.beta + ratio(ps.d, ps.p) - zeta0(ps);
}

}  // namespace

void validate(const ParameterSet& ps) {
  if (!(ps.alpha > 1.0 && ps.alpha <= 2.0)) throw DomainError("alpha must lie in (1, 2]");
  if (ps.d < 1) throw DomainError("dimension must be positive");
  for (double e : {ps.r, ps.p, ps.q, ps.p0, ps.q0})
    if (!(e >= 1.0)) throw DomainError("integrability exponents must be >= 1");
  if (!(ps.theta >= 0.0 && ps.theta < 0.5)) throw DomainError("theta must lie in [0, 1/2)");
  if (!(ps.eta > 0.0 && ps.eta < 1.0)) throw DomainError("eta must lie in (0, 1)");
  if (!(ps.delta > 0.0 && ps.delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(ps.delta_prime > 0.0 && ps.delta_prime < 1.0))
    throw DomainError("delta_prime must lie in (0, 1)");
  if (std::isfinite(ps.theta_bar) && !(ps.theta_bar > ps.theta))
    throw DomainError("theta_bar must exceed theta");
}

double conjugate_exponent(double p) {
  if (!(p >= 1.0)) throw DomainError("conjugate_exponent: p must be >= 1");
  if (p == 1.0) return kInf;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double ratio(double d, double p) { return std::isinf(p) ? 0.0 : d / p; }

double initial_integrability_factor(const ParameterSet& ps) {
  double p0c = conjugate_exponent(ps.p0);
  if (std::isinf(p0c) && std::isinf(ps.p)) return 1.0;
  if (std::isinf(p0c)) return 1.0;
  return std::min(1.0, p0c / ps.p);
}

double zeta0(const ParameterSet& ps) {
  double p0c = conjugate_exponent(ps.p0);
  return (ps.beta0 + ratio(ps.d, p0c)) * initial_integrability_factor(ps);
}

double beta0_bar(const ParameterSet& ps) { return ps.beta0 * initial_integrability_factor(ps); }

ConditionReport check_C3(const ParameterSet& ps) {
  ClauseSet c("C3");
  double lower = -ps.alpha + ps.alpha * inv(ps.r) + pos(c3_excess(ps, ps.theta));
  c.strict("beta > -alpha + alpha/r + (-theta - beta + d/p - zeta0)_+", ps.beta - lower);
  c.strict("beta < -1 - 2 theta", -1.0 - 2.0 * ps.theta - ps.beta);
  double excluded = -ps.theta - beta0_bar(ps) + ratio(ps.d, ps.p);
  double gap = std::abs(ps.beta - excluded);
  c.strict("beta != -theta - beta0_bar + d/p", gap > kExclusionTol ? gap : -1.0 + gap);
  return c.finish();
}

ConditionReport check_MS(const ParameterSet& ps) {
  ClauseSet c("MS");
  c.strict("r > alpha / (alpha - 1)", (ps.alpha - 1.0) / ps.alpha - inv(ps.r));
  c.non_strict("theta >= 0", ps.theta);
  c.strict("theta < (alpha - alpha/r - 1) / 2",
           0.5 * (ps.alpha - ps.alpha * inv(ps.r) - 1.0) - ps.theta);
  return c.finish();
}

ConditionReport check_WS(const ParameterSet& ps) {
  ClauseSet c("WS");
  c.strict("r > alpha / (alpha - 1)", (ps.alpha - 1.0) / ps.alpha - inv(ps.r));
  c.strict("r > 2 alpha", 1.0 / (2.0 * ps.alpha) - inv(ps.r));
  return c.finish();
}

ConditionReport check_C3LT(const ParameterSet& ps) {
  ClauseSet c("C3LT");
  double a = ps.alpha * (1.0 - inv(ps.r));
  c.strict("1 < alpha (1 - 1/r)", a - 1.0);
  c.non_strict("alpha (1 - 1/r) <= 1 + d/p", 1.0 + ratio(ps.d, ps.p) - a);
  c.non_strict("alpha (1 - 1/r) <= 2 - eps", 2.0 - ps.eps_lt - a);
  return c.finish();
}

ConditionReport check_C2star(const ParameterSet& ps) {
  ClauseSet c("C2star");
  double excess = -ps.beta + ratio(ps.d, ps.p) - zeta0(ps);
  double lower = -ps.alpha + ps.alpha * inv(ps.r) + pos(excess);
  c.strict("beta > -alpha + alpha/r + (-beta + d/p - zeta0)_+", ps.beta - lower);
  return c.finish();
}

ConditionReport check_C2star_strong(const ParameterSet& ps) {
  ClauseSet c("C2star_strong");
  double excess = -ps.beta + ratio(ps.d, ps.p) - zeta0(ps);
  double a_r = ps.alpha * inv(ps.r);
  c.strict("beta > 1 - 3 alpha / 2 + alpha/r + (-beta + d/p - zeta0)",
           ps.beta - (1.0 - 1.5 * ps.alpha + a_r + excess));
  c.strict("beta > -alpha + alpha/r + (-beta + d/p - zeta0)_+",
           ps.beta - (-ps.alpha + a_r + pos(excess)));
  return c.finish();
}

ConditionReport check_condition(const std::string& name, const ParameterSet& ps) {
  if (name == "C3") return check_C3(ps);
  if (name == "MS") return check_MS(ps);
  if (name == "WS") return check_WS(ps);
  if (name == "C3LT") return check_C3LT(ps);
  if (name == "C2star") return check_C2star(ps);
  if (name == "C2star_strong") return check_C2star_strong(ps);
  throw std::invalid_argument("unknown condition: " + name);
}

std::optional<ThetaInterval> feasible_theta_interval(const ParameterSet& ps) {
  // MS r-clause does not involve theta.
  if (!((ps.alpha - 1.0) / ps.alpha - inv(ps.r) > 0.0)) return std::nullopt;
  // C3 lower clause: A > (c - theta)_+ with A = beta + alpha - alpha/r.
  double A = ps.beta + ps.alpha - ps.alpha * inv(ps.r);
  if (!(A > 0.0)) return std::nullopt;
  double c = -ps.beta + ratio(ps.d, ps.p) - zeta0(ps);

  Interval iv;
  iv.lo = 0.0;
  iv.lo_closed = true;
  if (c - A >= 0.0) {
    iv.lo = c - A;
    iv.lo_closed = false;
  }
  iv.hi = std::min({0.5, 0.5 * (-1.0 - ps.beta), 0.5 * (ps.alpha - ps.alpha * inv(ps.r) - 1.0)});
  iv.hi_closed = false;
  if (!(iv.lo < iv.hi)) return std::nullopt;

  ThetaInterval out{iv, std::nullopt};
  double excluded = -beta0_bar(ps) + ratio(ps.d, ps.p) - ps.beta;
  if (iv.contains(excluded)) out.excluded = excluded;
  return out;
}

DerivedQuantities gamma_exponents(const ParameterSet& ps) {
  DerivedQuantities dq;
  dq.zeta0 = zeta0(ps);
  dq.beta0_bar = beta0_bar(ps);
  dq.p0_bar = ps.p0;
  dq.q0_bar = ps.q0;
  const double a = ps.alpha;
  const double rc_inv = 1.0 - inv(ps.r);  // 1/r'
  dq.gamma0 = pos(c3_excess(ps, ps.theta)) / a;
  dq.gamma = ps.eta / a + dq.gamma0;
  dq.gamma1 = dq.gamma;
  dq.gamma2 = rc_inv - 1.0 / a;
  dq.Gamma_cl = ps.eta * (a - 1.0 + ps.beta - a * inv(ps.r) - ratio(ps.d, ps.p) + dq.zeta0);
  dq.gamma_star = (-ps.beta + ratio(ps.d, ps.p) - dq.zeta0 +
                   (1.0 + ps.eta) / (2.0 * ps.eta) * dq.Gamma_cl) /
                  a;
  dq.drift_exponent = rc_inv - dq.gamma + (ps.beta - ps.delta) / a;
  dq.horizon_denominator = dq.gamma - rc_inv - (ps.beta - ps.delta + ps.eta) / a;

  double r_hi = std::isinf(ps.r) ? 1.0 / dq.gamma : ps.r / (1.0 + ps.r * dq.gamma);
  dq.r_theta_range = Interval{a, r_hi, false, false};

  auto c3 = check_C3(ps);
  if (!c3.satisfied) {
    dq.feasible = false;
    dq.flags.push_back("C3 violated");
  }
  if (c3.satisfied && !(dq.gamma < rc_inv + ps.beta / a)) {
    dq.feasible = false;
    dq.flags.push_back("gamma >= 1/r' + beta/alpha");
  }
  if (!check_C3LT(ps).satisfied) dq.flags.push_back("C3LT violated: gamma2 informational");
  if (!check_C2star(ps).satisfied) dq.flags.push_back("C2star violated: Gamma informational");
  if (!(dq.Gamma_cl > 0.0 && dq.Gamma_cl < 1.0)) dq.flags.push_back("Gamma outside (0, 1)");
  if (!(dq.horizon_denominator < 0.0)) {
    dq.feasible = false;
    dq.flags.push_back("horizon exponent denominator not negative");
  }
  return dq;
}

double time_horizon(double C0, double Cb, double exponent_denom) {
  if (!(exponent_denom < 0.0)) throw DomainError("time_horizon: exponent denominator must be < 0");
  if (!(C0 > 0.0 && Cb > 0.0)) throw DomainError("time_horizon: constants must be positive");
  return std::pow(4.0 * C0 * Cb, 1.0 / exponent_denom);
}

double time_horizon_longtime(double horizon_short, double T, double mu_norm, double gate) {
  return mu_norm >= gate ? horizon_short : T;
}

std::optional<std::pair<double, double>> gronwall_roots(double c_mu, double c_b) {
  if (c_mu < 0.0 || c_b < 0.0) throw DomainError("gronwall_roots: coefficients must be >= 0");
  if (c_b == 0.0) return std::make_pair(c_mu, kInf);
  double disc = 1.0 - 4.0 * c_mu * c_b;
  if (!(disc > 0.0)) return std::nullopt;
  double sq = std::sqrt(disc);
  // Cancellation-free lower root: 2 c_mu / (1 + sqrt(disc)).
  double lower = 2.0 * c_mu / (1.0 + sq);
  double upper = (1.0 + sq) / (2.0 * c_b);
  return std::make_pair(lower, upper);
}

}  // namespace besov_mkv
