#include "besov_mkv/besov.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "besov_mkv/errors.hpp"
#include "besov_mkv/path.hpp"

namespace besov_mkv {

namespace {

constexpr double kExponentTol = 1e-12;

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

double accumulate_lp(const std::vector<double>& mag, double ell, double vol) {
  if (std::isinf(ell)) return *std::max_element(mag.begin(), mag.end());
  double s = 0.0;
  if (ell == 1.0) {
    for (double v : mag) s += v;
    return s * vol;
  }
  if (ell == 2.0) {
    for (double v : mag) s += v * v;
    return std::sqrt(s * vol);
  }
  for (double v : mag) s += std::pow(v, ell);
  return std::pow(s * vol, 1.0 / ell);
}

// Pointwise magnitude of the inverse transforms of comps[c] * mult.
std::vector<double> filtered_magnitude(const std::vector<Spectrum>& comps,
                                       const std::vector<double>& mult) {
  const Grid& g = comps.front().grid();
  std::vector<double> mag(g.size(), 0.0);
  std::vector<double> buf(g.size());
  Spectrum work(g);
  for (const auto& s : comps) {
    for (std::size_t i = 0; i < s.size(); ++i) work[i] = s[i] * mult[i];
    from_spectrum_into(work, buf);
    if (comps.size() == 1) {
      for (std::size_t i = 0; i < buf.size(); ++i) mag[i] = std::abs(buf[i]);
    } else {
      for (std::size_t i = 0; i < buf.size(); ++i) mag[i] += buf[i] * buf[i];
    }
  }
  if (comps.size() > 1)
    for (double& v : mag) v = std::sqrt(v);
  return mag;
}

std::vector<Spectrum> spectra_of(const GridFunction& f) {
  std::vector<Spectrum> out;
  out.reserve(f.components());
  for (int c = 0; c < f.components(); ++c) out.push_back(to_spectrum(f, c));
  return out;
}

BesovNorm norm_of(const GridFunction& f, const BesovSpec& spec, double alpha,
                  const BesovOptions& opts) {
  return ThermicNormEvaluator(f.grid(), spec, alpha, opts)(f);
}

GridFunction pointwise_product(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("product: grid mismatch");
  GridFunction out(f.grid(), 1);
  for (std::size_t i = 0; i < out.points(); ++i) out[i] = f[i] * g[i];
  return out;
}

}  // namespace

double lp_norm(const Grid& grid, std::span<const double> values, double ell) {
  if (!(ell >= 1.0)) throw DomainError("lp_norm: ell must be >= 1");
  std::vector<double> mag(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mag[i] = std::abs(values[i]);
  return accumulate_lp(mag, ell, grid.cell_volume());
}

double lp_norm(const GridFunction& f, double ell) {
  if (f.components() == 1) return lp_norm(f.grid(), f.component(0), ell);
  if (!(ell >= 1.0)) throw DomainError("lp_norm: ell must be >= 1");
  std::vector<double> mag(f.points(), 0.0);
  for (int c = 0; c < f.components(); ++c) {
    auto v = f.component(c);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] += v[i] * v[i];
  }
  for (double& v : mag) v = std::sqrt(v);
  return accumulate_lp(mag, ell, f.grid().cell_volume());
}

double low_frequency_cut(double xi_abs) {
  if (xi_abs <= 1.0) return 1.0;
  if (xi_abs >= 1.5) return 0.0;
  double s = (xi_abs - 1.0) / 0.5;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

int thermic_order(double gamma, double alpha) {
  return std::max(1, static_cast<int>(std::floor(gamma / alpha)) + 1);
}

ThermicNormEvaluator::ThermicNormEvaluator(const Grid& grid, const BesovSpec& spec,
                                           double alpha_ref, BesovOptions opts)
    : grid_(grid), spec_(spec), alpha_(alpha_ref), opts_(opts) {
  if (!(spec.ell >= 1.0 && spec.m >= 1.0)) throw DomainError("Besov spec: ell, m must be >= 1");
  if (!(alpha_ref > 0.0 && alpha_ref <= 2.0)) throw DomainError("Besov: alpha out of range");
  if (opts_.v_nodes < 4) throw DomainError("Besov: need at least 4 v-nodes");
  n_ = thermic_order(spec.gamma, alpha_ref);
  v_lo_ = std::min(opts_.v_min, 0.01 / std::pow(grid.nyquist(), alpha_ref));
  const auto& mag = mode_magnitudes(grid);
  lam_.resize(mag.size());
  phi_.resize(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    lam_[i] = std::pow(mag[i], alpha_ref);
    phi_[i] = low_frequency_cut(mag[i]);
  }
  build_nodes(opts_.v_nodes, v_, log_w_);
}

void ThermicNormEvaluator::build_nodes(int count, std::vector<double>& v,
                                       std::vector<double>& w) const {
  v.resize(count);
  w.resize(count);
  const double a = std::log(v_lo_);
  const double step = -a / (count - 1);
  for (int j = 0; j < count; ++j) {
    v[j] = std::exp(a + j * step);
    w[j] = (j == 0 || j == count - 1) ? 0.5 * step : step;
  }
}

ThermicNormEvaluator::Parts ThermicNormEvaluator::evaluate(const std::vector<Spectrum>& comps,
                                                           const std::vector<double>& v,
                                                           const std::vector<double>& log_w,
                                                           double band_limit) const {
  const auto& mag = mode_magnitudes(grid_);
  const std::size_t size = lam_.size();
  std::vector<double> mult(size);
  // Smooth truncation: a sharp one rings, which inflates L^1 and L^inf norms.
  auto band = [&](std::size_t i) {
    return std::isinf(band_limit) ? 1.0 : low_frequency_cut(1.5 * mag[i] / band_limit);
  };

  Parts parts;
  for (std::size_t i = 0; i < size; ++i) mult[i] = phi_[i] * band(i);
  parts.low = accumulate_lp(filtered_magnitude(comps, mult), spec_.ell, grid_.cell_volume());

  const double expo = n_ - spec_.gamma / alpha_;
  const double sign = (n_ % 2 == 0) ? 1.0 : -1.0;
  std::vector<double> lam_n(size);
  // The thermic part acts on the complement of the low-frequency cut; this
  // is an equivalent norm and keeps band-limited fields purely low-frequency.
  for (std::size_t i = 0; i < size; ++i)
    lam_n[i] = sign * std::pow(lam_[i], n_) * (1.0 - phi_[i]) * band(i);

  const bool sup = std::isinf(spec_.m);
  double acc = 0.0;
  double first = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    for (std::size_t i = 0; i < size; ++i) mult[i] = lam_n[i] * std::exp(-v[j] * lam_[i]);
    double g = accumulate_lp(filtered_magnitude(comps, mult), spec_.ell, grid_.cell_volume());
    double h = std::pow(v[j], expo) * g;
    if (j == 0) first = h;
    if (sup)
      acc = std::max(acc, h);
    else
      acc += log_w[j] * std::pow(h, spec_.m);
  }
  if (!sup) {
    // Below the first node the integrand behaves like v^expo times a constant.
    if (expo > 0.0) acc += std::pow(first, spec_.m) / (expo * spec_.m);
    acc = std::pow(acc, 1.0 / spec_.m);
  }
  parts.thermic = acc;
  return parts;
}

BesovNorm ThermicNormEvaluator::from_spectra(const std::vector<Spectrum>& comps) const {
  if (comps.empty()) throw std::invalid_argument("Besov: no components");
  const double full_band = kInf;
  BesovNorm out;
  auto parts = evaluate(comps, v_, log_w_, full_band);
  int nodes = opts_.v_nodes;
  if (opts_.adaptive) {
    std::vector<double> v, w;
    double prev = parts.low + parts.thermic;
    while (2 * nodes - 1 <= opts_.max_nodes) {
      nodes = 2 * nodes - 1;
      build_nodes(nodes, v, w);
      auto refined = evaluate(comps, v, w, full_band);
      double now = refined.low + refined.thermic;
      parts = refined;
      if (std::abs(now - prev) <= opts_.adapt_tol * std::max(now, 1e-300)) break;
      prev = now;
    }
  }
  out.low_freq = parts.low;
  out.thermic = parts.thermic;
  out.total = parts.low + parts.thermic;
  out.nodes_used = nodes;
  if (opts_.detect_divergence) {
    auto half = evaluate(comps, v_, log_w_, 0.5 * grid_.nyquist());
    double half_total = half.low + half.thermic;
    out.band_ratio = half_total > 0.0 ? out.total / half_total : (out.total > 0.0 ? kInf : 1.0);
    out.diverged = out.band_ratio > opts_.diverged_ratio;
  }
  return out;
}

BesovNorm ThermicNormEvaluator::from_spectrum(const Spectrum& s) const {
  return from_spectra(std::vector<Spectrum>{s});
}

BesovNorm ThermicNormEvaluator::operator()(const GridFunction& f) const {
  if (!(f.grid() == grid_)) throw std::invalid_argument("Besov: grid mismatch");
  return from_spectra(spectra_of(f));
}

BesovNorm thermic_besov_norm(const GridFunction& f, const BesovSpec& spec, double alpha_ref,
                             const BesovOptions& opts) {
  return norm_of(f, spec, alpha_ref, opts);
}

double check_embedding(const GridFunction& f, const BesovSpec& from, const BesovSpec& to,
                       double alpha_ref, const BesovOptions& opts) {
  const int d = f.grid().d;
  std::vector<std::string> clauses;
  if (!(from.ell <= to.ell)) clauses.push_back("ell_from <= ell_to");
  if (!(from.m <= to.m)) clauses.push_back("m_from <= m_to");
  double lhs = to.gamma - d * inv(to.ell), rhs = from.gamma - d * inv(from.ell);
  if (!(lhs <= rhs + kExponentTol)) clauses.push_back("gamma_to - d/ell_to <= gamma_from - d/ell_from");
  if (!clauses.empty()) {
    std::string msg = "embedding refused:";
    for (auto& c : clauses) msg += " [" + c + "]";
    throw RefusedError(msg);
  }
  BesovOptions o = opts;
  o.detect_divergence = false;
  double a = norm_of(f, to, alpha_ref, o).total;
  double b = norm_of(f, from, alpha_ref, o).total;
  return a / b;
}

std::pair<double, double> check_lebesgue_chain(const GridFunction& f, double ell, double alpha_ref,
                                               const BesovOptions& opts) {
  BesovOptions o = opts;
  o.detect_divergence = false;
  double b1 = norm_of(f, {0.0, ell, 1.0}, alpha_ref, o).total;
  double binf = norm_of(f, {0.0, ell, kInf}, alpha_ref, o).total;
  double l = lp_norm(f, ell);
  return {l / b1, binf / l};
}

double check_young(const GridFunction& f, const GridFunction& g, const BesovSpec& spec,
                   double delta, const BesovSpec& spec_f, const BesovSpec& spec_g,
                   double alpha_ref, const BesovOptions& opts) {
  std::vector<std::string> clauses;
  if (std::abs(1.0 + inv(spec.ell) - inv(spec_f.ell) - inv(spec_g.ell)) > kExponentTol)
    clauses.push_back("1 + 1/ell = 1/ell1 + 1/ell2");
  if (!(inv(spec_f.m) + kExponentTol >= std::max(inv(spec.m) - inv(spec_g.m), 0.0)))
    clauses.push_back("1/m1 >= (1/m - 1/m2) v 0");
  if (!clauses.empty()) {
    std::string msg = "Young refused:";
    for (auto& c : clauses) msg += " [" + c + "]";
    throw RefusedError(msg);
  }
  BesovOptions o = opts;
  o.detect_divergence = false;
  double lhs = norm_of(convolve(f, g), spec, alpha_ref, o).total;
  double nf = norm_of(f, {spec.gamma - delta, spec_f.ell, spec_f.m}, alpha_ref, o).total;
  double ng = norm_of(g, {delta, spec_g.ell, spec_g.m}, alpha_ref, o).total;
  return lhs / (nf * ng);
}

DualityCheck check_duality(const GridFunction& f, const GridFunction& g, const BesovSpec& spec,
                           double alpha_ref, const BesovOptions& opts) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("duality: grid mismatch");
  DualityCheck out;
  double s = 0.0;
  for (std::size_t i = 0; i < f.points(); ++i) s += f[i] * g[i];
  out.lhs = std::abs(s * f.grid().cell_volume());
  BesovOptions o = opts;
  o.detect_divergence = false;
  BesovSpec dual{-spec.gamma, conjugate_exponent(spec.ell), conjugate_exponent(spec.m)};
  out.rhs = norm_of(f, spec, alpha_ref, o).total * norm_of(g, dual, alpha_ref, o).total;
  out.holds = out.lhs <= out.rhs * (1.0 + 1e-2);
  return out;
}

GridFunction gradient(const GridFunction& f) {
  if (f.components() != 1) throw std::invalid_argument("gradient: scalar field expected");
  const Grid& g = f.grid();
  GridFunction out(g, g.d);
  Spectrum s = to_spectrum(f);
  for (int c = 0; c < g.d; ++c) {
    const auto& xi = mode_component(g, c);
    Spectrum ds(g);
    for (std::size_t i = 0; i < s.size(); ++i) ds[i] = Complex(0.0, xi[i]) * s[i];
    from_spectrum_into(ds, out.component(c));
  }
  return out;
}

double check_lift(const GridFunction& f, const BesovSpec& spec, double alpha_ref,
                  const BesovOptions& opts) {
  BesovOptions o = opts;
  o.detect_divergence = false;
  double num = norm_of(gradient(f), {spec.gamma - 1.0, spec.ell, spec.m}, alpha_ref, o).total;
  double den = norm_of(f, spec, alpha_ref, o).total;
  if (num == 0.0) return 0.0;
  return num / den;
}

double check_product_rule(ProductRule rule, const GridFunction& f, const GridFunction& g,
                          const ProductExponents& e, double alpha_ref, const BesovOptions& opts) {
  std::vector<std::string> clauses;
  switch (rule) {
    case ProductRule::PR1:
      if (!(e.lambda >= 0.0)) clauses.push_back("lambda >= 0");
      if (std::abs(inv(e.ell) - inv(e.ell1) - inv(e.ell2)) > kExponentTol)
        clauses.push_back("1/ell = 1/ell1 + 1/ell2");
      break;
    case ProductRule::PR2:
      if (!(e.rho > std::abs(e.lambda))) clauses.push_back("rho > |lambda|");
      break;
    case ProductRule::PR3:
      if (!(e.lambda >= 0.0 && e.lambda1 >= 0.0 && e.lambda2 >= 0.0))
        clauses.push_back("lambda, lambda1, lambda2 >= 0");
      if (!std::isfinite(e.ell)) clauses.push_back("ell < inf");
      if (!(e.lambda1 < e.lambda2)) clauses.push_back("lambda1 < lambda2");
      if (!(e.lambda1 <= e.lambda)) clauses.push_back("lambda1 <= lambda");
      break;
  }
  if (!(e.ell >= 1.0 && e.ell1 >= 1.0 && e.ell2 >= 1.0 && e.m >= 1.0))
    clauses.push_back("integrability exponents >= 1");
  if (!clauses.empty()) {
    std::string msg = "product rule refused:";
    for (auto& c : clauses) msg += " [" + c + "]";
    throw RefusedError(msg);
  }
  BesovOptions o = opts;
  o.detect_divergence = false;
  auto fg = pointwise_product(f, g);
  switch (rule) {
    case ProductRule::PR1:
      return norm_of(fg, {e.lambda, e.ell, kInf}, alpha_ref, o).total /
             (norm_of(f, {e.lambda, e.ell1, kInf}, alpha_ref, o).total *
              norm_of(g, {e.lambda, e.ell2, 1.0}, alpha_ref, o).total);
    case ProductRule::PR2:
      return norm_of(fg, {e.lambda, e.ell, e.m}, alpha_ref, o).total /
             (norm_of(f, {e.rho, kInf, kInf}, alpha_ref, o).total *
              norm_of(g, {e.lambda, e.ell, e.m}, alpha_ref, o).total);
    case ProductRule::PR3:
      return norm_of(fg, {-e.lambda, e.ell, kInf}, alpha_ref, o).total /
             (norm_of(f, {-e.lambda1, kInf, kInf}, alpha_ref, o).total *
              norm_of(g, {e.lambda2, e.ell, 1.0}, alpha_ref, o).total);
  }
  return 0.0;
}

double beta_integral(double gamma1, double gamma2, double t, double r) {
  if (!(gamma1 < 1.0 && gamma2 < 1.0)) throw DomainError("beta_integral: exponents must be < 1");
  if (!(r >= t)) throw DomainError("beta_integral: r must be >= t");
  if (r == t) return 0.0;
  return std::beta(1.0 - gamma1, 1.0 - gamma2) * std::pow(r - t, 1.0 - gamma1 - gamma2);
}

double weight(const WeightSpec& w, double s) {
  if (s < 0.0) throw DomainError("weight: elapsed time must be >= 0");
  return std::pow(std::min(s, 1.0), w.lambda1) * std::pow(std::max(s, 1.0), w.lambda2);
}

BetaLtResult beta_integral_lt(double a1, double a2, double b1, double b2, double t, double s) {
  for (double e : {a1, a2, b1, b2})
    if (!(e >= 0.0 && e < 1.0)) throw DomainError("beta_integral_lt: exponents must lie in [0, 1)");
  if (!(s > t)) throw DomainError("beta_integral_lt: need s > t");
  const WeightSpec wa{-a1, -a2}, wb{-b1, -b2};
  auto integrand = [&](double v) {
    double x = std::max(s - v, 0.0), y = std::max(v - t, 0.0);
    if (x == 0.0 || y == 0.0) return 0.0;
    return weight(wa, x) * weight(wb, y);
  };
  // Split at the kinks of the weights so each piece is smooth inside.
  std::vector<double> cuts{t, s};
  for (double c : {t + 1.0, s - 1.0})
    if (c > t && c < s) cuts.push_back(c);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  boost::math::quadrature::tanh_sinh<double> integrator;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrator.integrate(integrand, cuts[i], cuts[i + 1]);
  }
  BetaLtResult out;
  out.quadrature = total;
  out.bound = weight(WeightSpec{1.0 - b1 - a1, 1.0 - b2 - a2}, s - t);
  return out;
}

double calibrate_beta_lt_constant(const std::vector<std::array<double, 4>>& exponents,
                                  const std::vector<double>& elapsed) {
  double C = 0.0;
  for (const auto& e : exponents)
    for (double len : elapsed) C = std::max(C, beta_integral_lt(e[0], e[1], e[2], e[3], 0.0, len).ratio());
  return C;
}

double weighted_path_norm(const DensityPath& path, double r, const WeightSpec& w,
                          const BesovSpec& spec, double alpha_ref) {
  BesovOptions o;
  o.detect_divergence = false;
  ThermicNormEvaluator eval(path.grid, spec, alpha_ref, o);
  double acc = 0.0;
  double prev = path.t0;
  for (std::size_t j = 0; j < path.size(); ++j) {
    double v = weight(w, path.elapsed(j)) * eval(path.frames[j]).total;
    if (std::isinf(r))
      acc = std::max(acc, v);
    else
      acc += (path.times[j] - prev) * std::pow(v, r);
    prev = path.times[j];
  }
  return std::isinf(r) ? acc : std::pow(acc, 1.0 / r);
}

}  // namespace besov_mkv
