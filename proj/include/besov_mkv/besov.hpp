#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "besov_mkv/grid.hpp"
#include "besov_mkv/params.hpp"

namespace besov_mkv {

/// Regularity gamma, spatial integrability ell, scale summability m.
struct BesovSpec {
  double gamma = 0.0;
  double ell = 2.0;
  double m = 2.0;
};

/// Long-time weight w(s) = (s ∧ 1)^lambda1 (s ∨ 1)^lambda2.
struct WeightSpec {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  WeightSpec negate() const { return {-lambda1, -lambda2}; }
};

struct BesovOptions {
  int v_nodes = 64;
  /// Lower end of the v-grid; the effective value is
  /// min(v_min, 0.01 / nyquist^alpha) so that the finest scale is resolved.
  double v_min = 1e-6;
  /// Double the node count until the norm changes by less than adapt_tol.
  bool adaptive = false;
  double adapt_tol = 5e-3;
  int max_nodes = 1024;
  /// Compare with the norm of the half-band truncation of f.
  bool detect_divergence = true;
  double diverged_ratio = 1.10;
};

struct BesovNorm {
  double low_freq = 0.0;
  double thermic = 0.0;
  double total = 0.0;
  bool diverged = false;
  /// total / total of the half-band truncation (1 when not computed).
  double band_ratio = 1.0;
  int nodes_used = 0;
};

/// Trapezoid L^ell norm on the periodic grid. Vector fields use the pointwise
/// Euclidean magnitude. ell = inf is the grid maximum.
double lp_norm(const GridFunction& f, double ell);
double lp_norm(const Grid& grid, std::span<const double> values, double ell);

/// Low-frequency cut: 1 on |xi| <= 1, 0 on |xi| >= 3/2, C^2 quintic blend.
double low_frequency_cut(double xi_abs);

/// Derivative order n = max(1, floor(gamma / alpha) + 1).
int thermic_order(double gamma, double alpha);

/// Evaluates thermic Besov norms for one (grid, spec, alpha) triple with the
/// multiplier tables precomputed. Thread safe for concurrent calls.
class ThermicNormEvaluator {
 public:
  ThermicNormEvaluator(const Grid& grid, const BesovSpec& spec, double alpha_ref,
                       BesovOptions opts = {});

  BesovNorm operator()(const GridFunction& f) const;
  /// Norm of a (vector) field given by the spectra of its components.
  BesovNorm from_spectra(const std::vector<Spectrum>& comps) const;
  /// Norm of the scalar field whose spectrum is `s`.
  BesovNorm from_spectrum(const Spectrum& s) const;

  const BesovSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }
  const std::vector<double>& v_nodes() const { return v_; }

 private:
  struct Parts {
    double low = 0.0;
    double thermic = 0.0;
  };
  Parts evaluate(const std::vector<Spectrum>& comps, const std::vector<double>& v,
                 const std::vector<double>& log_weights, double band_limit) const;
  void build_nodes(int count, std::vector<double>& v, std::vector<double>& w) const;

  Grid grid_;
  BesovSpec spec_;
  double alpha_;
  BesovOptions opts_;
  int n_;
  double v_lo_;
  std::vector<double> v_;
  std::vector<double> log_w_;
  std::vector<double> lam_;  // |xi|^alpha
  std::vector<double> phi_;
};

BesovNorm thermic_besov_norm(const GridFunction& f, const BesovSpec& spec, double alpha_ref,
                             const BesovOptions& opts = {});

/// ||f||_to / ||f||_from. Refused unless ell_from <= ell_to, m_from <= m_to
/// and gamma_to - d/ell_to <= gamma_from - d/ell_from.
double check_embedding(const GridFunction& f, const BesovSpec& from, const BesovSpec& to,
                       double alpha_ref, const BesovOptions& opts = {});

/// Ratios of the chain B^0_{ell,1} -> L^ell -> B^0_{ell,inf}:
/// first ||f||_{L^ell} / ||f||_{B^0_{ell,1}}, second ||f||_{B^0_{ell,inf}} / ||f||_{L^ell}.
std::pair<double, double> check_lebesgue_chain(const GridFunction& f, double ell,
                                               double alpha_ref, const BesovOptions& opts = {});

/// ||f * g||_{B^gamma_{ell,m}} / (||f||_{B^{gamma-delta}_{ell1,m1}} ||g||_{B^delta_{ell2,m2}}).
/// spec_f and spec_g supply (ell1, m1) and (ell2, m2); their gamma is ignored.
double check_young(const GridFunction& f, const GridFunction& g, const BesovSpec& spec,
                   double delta, const BesovSpec& spec_f, const BesovSpec& spec_g,
                   double alpha_ref, const BesovOptions& opts = {});

struct DualityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// |int f g| <= ||f||_{B^gamma_{ell,m}} ||g||_{B^-gamma_{ell',m'}} (1 + 1e-2).
DualityCheck check_duality(const GridFunction& f, const GridFunction& g, const BesovSpec& spec,
                           double alpha_ref, const BesovOptions& opts = {});

/// Spectral gradient of a scalar field (d components).
GridFunction gradient(const GridFunction& f);

/// ||grad f||_{B^{gamma-1}} / ||f||_{B^gamma}; zero for constant f.
double check_lift(const GridFunction& f, const BesovSpec& spec, double alpha_ref,
                  const BesovOptions& opts = {});

enum class ProductRule { PR1, PR2, PR3 };

struct ProductExponents {
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double rho = 0.0;
  double ell = 2.0;
  double ell1 = 2.0;
  double ell2 = 2.0;
  double m = kInf;
};

/// Ratio of the left to the right side of the product inequality, with
/// the product taken pointwise on the grid.
///   PR1: ||fg||_{B^lambda_{ell,inf}} / (||f||_{B^lambda_{ell1,inf}} ||g||_{B^lambda_{ell2,1}})
///   PR2: ||fg||_{B^lambda_{ell,m}} / (||f||_{B^rho_{inf,inf}} ||g||_{B^lambda_{ell,m}})
///   PR3: ||fg||_{B^-lambda_{ell,inf}} / (||f||_{B^-lambda1_{inf,inf}} ||g||_{B^lambda2_{ell,1}})
double check_product_rule(ProductRule rule, const GridFunction& f, const GridFunction& g,
                          const ProductExponents& e, double alpha_ref,
                          const BesovOptions& opts = {});

/// int_t^r (r-s)^-gamma1 (s-t)^-gamma2 ds = B(1-gamma1, 1-gamma2)(r-t)^(1-gamma1-gamma2).
double beta_integral(double gamma1, double gamma2, double t, double r);

double weight(const WeightSpec& w, double s);

struct BetaLtResult {
  double quadrature = 0.0;
  /// w^{1-b2-a2}_{1-b1-a1}(s - t)
  double bound = 0.0;
  double ratio() const { return quadrature / bound; }
};

/// I_{t,s} = int_t^s w^{-a2}_{-a1}(s-v) w^{-b2}_{-b1}(v-t) dv by adaptive
/// quadrature, together with the bound shape.
BetaLtResult beta_integral_lt(double a1, double a2, double b1, double b2, double t, double s);

/// Smallest C with I_{t,s} <= C w(s-t) over the given exponent tuples and
/// elapsed times.
double calibrate_beta_lt_constant(const std::vector<std::array<double, 4>>& exponents,
                                  const std::vector<double>& elapsed);

}  // namespace besov_mkv
