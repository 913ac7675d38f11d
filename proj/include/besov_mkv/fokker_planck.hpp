#pragma once

#include <optional>
#include <string>
#include <vector>

#include "besov_mkv/besov.hpp"
#include "besov_mkv/kernels.hpp"
#include "besov_mkv/params.hpp"
#include "besov_mkv/path.hpp"

namespace besov_mkv {

enum class Regime { short_time, long_time, classical };

enum class PicardInit { heat_flow, uniform };

struct SolverConfig {
  double alpha = 2.0;
  double dt = 1.0 / 512.0;
  /// Tolerance on the weighted sup distance between Picard iterates.
  double picard_tol = 1e-6;
  int picard_max = 200;
  /// The Duhamel integral is integrated exactly in Fourier variables for a
  /// forcing that is piecewise linear in time.
  std::string quad_rule = "exponential_trapezoid";
  double mass_tol = 1e-3;
  double epsilon = 0.05;
  /// Norm and time weight of the run.
  BesovSpec norm{0.0, 1.0, 1.0};
  WeightSpec weight{0.0, 0.0};
  PicardInit init = PicardInit::heat_flow;
};

/// Fills alpha, norm and weight for a regime:
///   short:     B^{-beta-theta}_{p',1}, weight (s - t)^gamma
///   long:      B^{-beta-theta}_{p',1}, weight w^{gamma2}_{gamma1}
///   classical: B^{-beta+Gamma}_{p',1}, weight (s - t)^{gamma*}
SolverConfig solver_config(const ParameterSet& ps, Regime regime, SolverConfig base = {});

/// Componentwise spectral convolution b * rho.
GridFunction convolution_drift(const GridFunction& b, const GridFunction& rho);

/// Picard iteration on the mollified Duhamel equation over nodes
/// t0 + j dt, j = 1..M. Throws NumericError on divergence (three growing
/// distances in a row), on non-convergence and on mass drift.
DensityPath solve_mollified_fp(const TimeKernel& b_eps, const GridFunction& mu, double t0,
                               double S, const SolverConfig& cfg);

/// One application of the Duhamel map with kernel b to the given path.
DensityPath duhamel_map(const TimeKernel& b, const DensityPath& path, const SolverConfig& cfg);

/// sup_j w(s_j - t0) ||a_j - b_j||_B in the path's norm.
double weighted_distance(const DensityPath& a, const DensityPath& b, double alpha_ref);

/// Running maximum of w(v - t0) ||rho(v)||_B.
std::vector<double> weighted_sup_path(const DensityPath& path, const WeightSpec& w,
                                      const BesovSpec& spec, double alpha_ref);

/// Exponents of C_mu(s) = C ||mu|| e(s)^mu_exp and C_b(s) = C (||b|| + ||div b||) e(s)^b_exp.
/// In the long-time regime e(s) = s ∧ 1, otherwise e(s) = s.
struct EnvelopeExponents {
  double mu_exp = 0.0;
  double b_exp = 0.0;
  bool long_time = false;
};
EnvelopeExponents envelope_exponents(const ParameterSet& ps, Regime regime);

struct GronwallFit {
  double C_cal = 0.0;
  std::vector<double> elapsed;
  std::vector<double> f;
  std::vector<double> c_mu_curve;
  std::vector<double> c_b_curve;
  /// Lower root per node; NaN where c_mu c_b >= 1/4.
  std::vector<double> envelope;
  /// Elapsed time at which c_mu c_b reaches 1/4 (inf if never).
  double horizon = 0.0;
  bool finite_constant = true;
};

/// Smallest C with C_b f^2 - f + C_mu >= 0 at every node.
double calibrate_gronwall(const std::vector<double>& elapsed, const std::vector<double>& f,
                          const EnvelopeExponents& e, double mu_norm, double b_norm);

GronwallFit gronwall_envelope(const std::vector<double>& elapsed, const std::vector<double>& f,
                              const EnvelopeExponents& e, double mu_norm, double b_norm,
                              double C_cal);

/// Smallest C with f_free <= C_mu and f_drift <= C_b f^2 at every node, where
/// f_free and f_drift are the weighted running sups of the free heat flow and
/// of the Duhamel drift term. Since f <= f_free + f_drift this implies the
/// quadratic inequality.
double calibrate_gronwall_split(const std::vector<double>& elapsed, const std::vector<double>& f,
                                const std::vector<double>& f_free, const std::vector<double>& f_drift,
                                const EnvelopeExponents& e, double mu_norm, double b_norm);

/// Without C_cal, calibrates on the path itself with calibrate_gronwall_split.
GronwallFit gronwall_envelope(const DensityPath& path, const ParameterSet& ps, Regime regime,
                              double mu_norm, double b_norm,
                              std::optional<double> C_cal = std::nullopt);

/// f(s) <= R_minus(s) at every node with elapsed < horizon.
bool envelope_holds(const GronwallFit& fit);

/// ||mu||_{B^{beta0_bar}_{p0_bar, q0_bar}}.
double initial_data_norm(const GridFunction& mu, const ParameterSet& ps);
/// L^r in time of ||b(s)||_{B^beta_{p,q}} + ||div b(s)||_{B^beta_{p,q}} over the slabs.
double kernel_norm(const TimeKernel& b, const ParameterSet& ps);

struct CauchyTable {
  std::vector<double> epsilons;
  /// Entry k compares eps_k and eps_{k+1}.
  std::vector<double> besov_diff;
  std::vector<double> l1_diff;
  std::vector<DensityPath> paths;
  bool converging = true;
};

/// Consecutive differences of paths already solved on the same nodes.
CauchyTable cauchy_table(std::vector<DensityPath> paths, const std::vector<double>& epsilons,
                         double alpha_ref);
CauchyTable cauchy_sweep(const TimeKernel& b, const GridFunction& mu, double t0, double S,
                         const std::vector<double>& epsilons, const SolverConfig& cfg);

/// Weighted distance between the path and the Duhamel map with the
/// un-mollified kernel applied to it.
double limit_duhamel_residual(const DensityPath& path, const TimeKernel& b, const SolverConfig& cfg);

/// (sum_j dt ||b * rho(s_j)||^{r_theta}_{B^{-theta}_{inf,inf}})^{1/r_theta}.
/// Refused when r_theta lies outside (alpha, r).
double drift_integrability(const DensityPath& path, const TimeKernel& b, double r_theta,
                           double theta, double r, double alpha);

struct LongTimeGate {
  double C_cal = 0.0;
  double mu_norm = 0.0;
  double b_norm = 0.0;
  /// Short-time horizon (elapsed).
  double horizon = 0.0;
  /// Smallness threshold C0 = 1 / (4 C_cal^2 (||b|| + ||div b||)).
  double gate = kInf;
  bool small_data() const { return mu_norm < gate; }
};

LongTimeGate long_time_gate(const ParameterSet& ps, double C_cal, double mu_norm, double b_norm);

struct WeightedRun {
  DensityPath path;
  /// Running sup of the weighted norm per node.
  std::vector<double> weighted;
  double sup = 0.0;
};

/// Requires C3LT. Refused when S - t0 exceeds the short-time horizon and the
/// initial data is above the smallness gate.
WeightedRun solve_fp_longtime(const TimeKernel& b_eps, const GridFunction& mu, double t0, double S,
                              const SolverConfig& cfg, const ParameterSet& ps,
                              const LongTimeGate& gate);

/// Requires C2star and theta = 0.
WeightedRun solve_fp_classical(const TimeKernel& b_eps, const GridFunction& mu, double t0, double S,
                               const SolverConfig& cfg, const ParameterSet& ps);

/// Per-node columns of an accepted path. `residual` is the Besov distance
/// (cfg.norm) between the path and one more application of the Duhamel map;
/// `envelope` is NaN when no fit is given or the envelope is undefined.
struct PathReport {
  std::vector<double> s;
  std::vector<double> mass;
  std::vector<double> besov_norm;
  std::vector<double> weighted_norm;
  std::vector<double> envelope;
  std::vector<double> residual;
};
PathReport path_report(const DensityPath& path, const TimeKernel& b, const SolverConfig& cfg,
                       const GronwallFit* fit = nullptr);

}  // namespace besov_mkv
