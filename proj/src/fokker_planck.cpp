#include "besov_mkv/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "besov_mkv/errors.hpp"
#include "besov_mkv/parallel.hpp"
#include "besov_mkv/stable_kernel.hpp"

namespace besov_mkv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// (1 - e^-z) / z and (1 - e^-z - z e^-z) / z^2 with series near 0.
double phi1(double z) { return z < 1e-8 ? 1.0 - 0.5 * z : -std::expm1(-z) / z; }
double psi(double z) {
  if (z < 1e-4) return 0.5 - z / 3.0 + z * z / 8.0;
  return (-std::expm1(-z) - z * std::exp(-z)) / (z * z);
}

class DuhamelOperator {
 public:
  DuhamelOperator(const TimeKernel& b, const GridFunction& mu, double t0, std::size_t nodes,
                  const SolverConfig& cfg)
      : grid_(mu.grid()), cfg_(cfg), t0_(t0), nodes_(nodes), mu_hat_(to_spectrum(mu)) {
    if (!(b.grid() == grid_)) throw std::invalid_argument("Fokker-Planck: kernel grid mismatch");
    if (b.dim() != grid_.d) throw std::invalid_argument("Fokker-Planck: kernel must have d components");
    const auto& mag = mode_magnitudes(grid_);
    const std::size_t n = mag.size();
    decay_.resize(n);
    w_prev_.resize(n);
    w_next_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double z = std::pow(mag[i], cfg.alpha) * cfg.dt;
      decay_[i] = std::exp(-z);
      double p = psi(z);
      w_prev_[i] = cfg.dt * p;
      w_next_[i] = cfg.dt * (phi1(z) - p);
    }
    zero_ = b.is_zero();
    for (const auto& slab : b.slabs) {
      std::vector<Spectrum> comps;
      for (int c = 0; c < grid_.d; ++c) comps.push_back(to_spectrum(slab, c));
      kernel_hat_.push_back(std::move(comps));
    }
    slab_of_.resize(nodes + 1);
    for (std::size_t j = 0; j <= nodes; ++j)
      slab_of_[j] = static_cast<std::size_t>(&b.at(time(j)) - b.slabs.data());
  }

  double time(std::size_t j) const { return t0_ + static_cast<double>(j) * cfg_.dt; }

  // frames[j - 1] is the density at node j; node 0 is mu.
  std::vector<GridFunction> apply(const std::vector<GridFunction>& frames,
                                  const GridFunction& mu) const {
    const std::size_t n = grid_.size();
    std::vector<Spectrum> forcing(nodes_ + 1);
    if (!zero_) {
      parallel_for(nodes_ + 1, [&](std::size_t j) {
        const GridFunction& rho = j == 0 ? mu : frames[j - 1];
        Spectrum rho_hat = to_spectrum(rho);
        Spectrum acc(grid_);
        std::vector<double> drift(n);
        for (int c = 0; c < grid_.d; ++c) {
          Spectrum s = kernel_hat_[slab_of_[j]][c];
          s *= rho_hat;
          from_spectrum_into(s, drift);
          for (std::size_t i = 0; i < n; ++i) drift[i] *= rho[i];
          Spectrum f = to_spectrum(GridFunction(grid_, 1, drift));
          const auto& xi = mode_component(grid_, c);
          for (std::size_t i = 0; i < n; ++i) acc[i] += Complex(0.0, xi[i]) * f[i];
        }
        forcing[j] = std::move(acc);
      });
    }
    std::vector<Spectrum> out_hat(nodes_, Spectrum(grid_));
    Spectrum integral(grid_);
    Spectrum free = mu_hat_;
    for (std::size_t j = 1; j <= nodes_; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        free[i] *= decay_[i];
        if (!zero_)
          integral[i] = decay_[i] * integral[i] + w_prev_[i] * forcing[j - 1][i] + w_next_[i] * forcing[j][i];
        out_hat[j - 1][i] = free[i] - integral[i];
      }
    }
    std::vector<GridFunction> out(nodes_);
    parallel_for(nodes_, [&](std::size_t j) { out[j] = from_spectrum(out_hat[j]); });
    return out;
  }

 private:
  Grid grid_;
  SolverConfig cfg_;
  double t0_;
  std::size_t nodes_;
  Spectrum mu_hat_;
  std::vector<double> decay_, w_prev_, w_next_;
  std::vector<std::vector<Spectrum>> kernel_hat_;
  std::vector<std::size_t> slab_of_;
  bool zero_ = false;
};

std::size_t node_count(double t0, double S, double dt) {
  if (!(S > t0)) throw DomainError("Fokker-Planck: S must exceed t0");
  if (!(dt > 0.0)) throw DomainError("Fokker-Planck: dt must be positive");
  double m = (S - t0) / dt;
  auto M = static_cast<std::size_t>(std::llround(m));
  if (M == 0 || std::abs(m - static_cast<double>(M)) > 1e-6 * m)
    throw DomainError("Fokker-Planck: S - t0 must be a multiple of dt");
  return M;
}

double frame_distance(const ThermicNormEvaluator& eval, const GridFunction& a, const GridFunction& b) {
  return eval(a - b).total;
}

double path_distance(const std::vector<GridFunction>& a, const std::vector<GridFunction>& b,
                     const std::vector<double>& elapsed, const WeightSpec& w,
                     const ThermicNormEvaluator& eval) {
  std::vector<double> d(a.size());
  parallel_for(a.size(), [&](std::size_t j) {
    d[j] = weight(w, elapsed[j]) * frame_distance(eval, a[j], b[j]);
  });
  double m = 0.0;
  for (double v : d) {
    if (!std::isfinite(v)) return kInf;
    m = std::max(m, v);
  }
  return m;
}

BesovOptions plain_options() {
  BesovOptions o;
  o.detect_divergence = false;
  return o;
}

void check_mass(const DensityPath& path, double tol) {
  for (std::size_t j = 0; j < path.size(); ++j) {
    double m = path.frames[j].integral();
    if (!(std::abs(m - 1.0) <= tol))
      throw NumericError(NumericError::Kind::mass_drift,
                         "Fokker-Planck: mass " + std::to_string(m) + " at s = " +
                             std::to_string(path.times[j]) + "; refine the time quadrature");
  }
}

}  // namespace

SolverConfig solver_config(const ParameterSet& ps, Regime regime, SolverConfig base) {
  auto dq = gamma_exponents(ps);
  base.alpha = ps.alpha;
  const double pc = conjugate_exponent(ps.p);
  switch (regime) {
    case Regime::short_time:
      base.norm = {-ps.beta - ps.theta, pc, 1.0};
      base.weight = {dq.gamma, dq.gamma};
      break;
    case Regime::long_time:
      base.norm = {-ps.beta - ps.theta, pc, 1.0};
      base.weight = {dq.gamma1, dq.gamma2};
      break;
    case Regime::classical:
      base.norm = {-ps.beta + dq.Gamma_cl, pc, 1.0};
      base.weight = {dq.gamma_star, dq.gamma_star};
      break;
  }
  return base;
}

GridFunction convolution_drift(const GridFunction& b, const GridFunction& rho) {
  if (!(b.grid() == rho.grid())) throw std::invalid_argument("convolution_drift: grid mismatch");
  if (rho.components() != 1) throw std::invalid_argument("convolution_drift: scalar density expected");
  GridFunction out(b.grid(), b.components());
  Spectrum r = to_spectrum(rho);
  for (int c = 0; c < b.components(); ++c) {
    Spectrum s = to_spectrum(b, c);
    s *= r;
    from_spectrum_into(s, out.component(c));
  }
  return out;
}

DensityPath solve_mollified_fp(const TimeKernel& b_eps, const GridFunction& mu, double t0, double S,
                               const SolverConfig& cfg) {
  if (mu.components() != 1) throw std::invalid_argument("Fokker-Planck: scalar initial density expected");
  if (!(cfg.picard_tol > 0.0)) throw DomainError("Fokker-Planck: picard_tol must be positive");
  if (!(cfg.dt > stable_min_time(cfg.alpha, mu.grid())))
    throw DomainError("Fokker-Planck: dt below the resolvable time of the heat kernel");
  const Grid& g = mu.grid();
  const std::size_t M = node_count(t0, S, cfg.dt);
  DuhamelOperator op(b_eps, mu, t0, M, cfg);
  ThermicNormEvaluator eval(g, cfg.norm, cfg.alpha, plain_options());

  DensityPath path;
  path.grid = g;
  path.t0 = t0;
  path.gamma_meta = cfg.weight;
  path.norm_spec = cfg.norm;
  path.initial = mu;
  std::vector<double> elapsed(M);
  for (std::size_t j = 0; j < M; ++j) {
    path.times.push_back(op.time(j + 1));
    elapsed[j] = path.times[j] - t0;
  }

  std::vector<GridFunction> cur;
  if (cfg.init == PicardInit::heat_flow) {
    cur = DuhamelOperator(zero_kernel(g, t0, S), mu, t0, M, cfg).apply({}, mu);
  } else {
    GridFunction u(g, 1);
    for (auto& v : u.values()) v = 1.0 / std::pow(2.0 * g.L, g.d);
    cur.assign(M, u);
  }

  int growing = 0;
  bool converged = false;
  for (int k = 0; k < cfg.picard_max; ++k) {
    auto next = op.apply(cur, mu);
    double dist = path_distance(next, cur, elapsed, cfg.weight, eval);
    path.picard_distances.push_back(dist);
    cur = std::move(next);
    path.iterations = k + 1;
    if (!std::isfinite(dist))
      throw NumericError(NumericError::Kind::picard_divergence,
                         "Fokker-Planck: Picard iterate is not finite; horizon too long, reduce S");
    std::size_t n = path.picard_distances.size();
    if (n >= 2 && dist > path.picard_distances[n - 2])
      ++growing;
    else
      growing = 0;
    if (growing >= 3)
      throw NumericError(NumericError::Kind::picard_divergence,
                         "Fokker-Planck: Picard distance grew three times in a row; horizon too "
                         "long, reduce S below the time horizon");
    if (dist < cfg.picard_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw NumericError(NumericError::Kind::convergence,
                       "Fokker-Planck: no convergence in " + std::to_string(cfg.picard_max) + " iterations");
  path.frames = std::move(cur);
  path.residual = path_distance(op.apply(path.frames, mu), path.frames, elapsed, cfg.weight, eval);
  check_mass(path, cfg.mass_tol);
  return path;
}

DensityPath duhamel_map(const TimeKernel& b, const DensityPath& path, const SolverConfig& cfg) {
  DuhamelOperator op(b, path.initial, path.t0, path.size(), cfg);
  DensityPath out = path;
  out.frames = op.apply(path.frames, path.initial);
  return out;
}

double weighted_distance(const DensityPath& a, const DensityPath& b, double alpha_ref) {
  if (a.size() != b.size()) throw std::invalid_argument("weighted_distance: node mismatch");
  ThermicNormEvaluator eval(a.grid, a.norm_spec, alpha_ref, plain_options());
  std::vector<double> elapsed(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) elapsed[j] = a.elapsed(j);
  return path_distance(a.frames, b.frames, elapsed, a.gamma_meta, eval);
}

std::vector<double> weighted_sup_path(const DensityPath& path, const WeightSpec& w,
                                      const BesovSpec& spec, double alpha_ref) {
  ThermicNormEvaluator eval(path.grid, spec, alpha_ref, plain_options());
  std::vector<double> v(path.size());
  parallel_for(path.size(), [&](std::size_t j) {
    v[j] = weight(w, path.elapsed(j)) * eval(path.frames[j]).total;
  });
  for (std::size_t j = 1; j < v.size(); ++j) v[j] = std::max(v[j], v[j - 1]);
  return v;
}

EnvelopeExponents envelope_exponents(const ParameterSet& ps, Regime regime) {
  auto dq = gamma_exponents(ps);
  const double a = ps.alpha;
  EnvelopeExponents e;
  switch (regime) {
    case Regime::short_time:
      e.mu_exp = ps.eta / a;
      e.b_exp = dq.drift_exponent;
      break;
    case Regime::long_time:
      e.mu_exp = ps.eta / a;
      e.b_exp = 1.0 - (std::isinf(ps.r) ? 0.0 : 1.0 / ps.r) - dq.gamma1 + (ps.beta - ps.delta) / a;
      e.long_time = true;
      break;
    case Regime::classical: {
      double x = (1.0 - ps.eta) / (2.0 * ps.eta) * dq.Gamma_cl / a;
      e.mu_exp = x;
      e.b_exp = x;
      break;
    }
  }
  return e;
}

namespace {

double envelope_time(const EnvelopeExponents& e, double s) { return e.long_time ? std::min(s, 1.0) : s; }

}  // namespace

double calibrate_gronwall(const std::vector<double>& elapsed, const std::vector<double>& f,
                          const EnvelopeExponents& e, double mu_norm, double b_norm) {
  double C = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    double u = envelope_time(e, elapsed[j]);
    double denom = b_norm * std::pow(u, e.b_exp) * f[j] * f[j] + mu_norm * std::pow(u, e.mu_exp);
    if (!(denom > 0.0)) return f[j] > 0.0 ? kInf : C;
    C = std::max(C, f[j] / denom);
  }
  return C;
}

GronwallFit gronwall_envelope(const std::vector<double>& elapsed, const std::vector<double>& f,
                              const EnvelopeExponents& e, double mu_norm, double b_norm,
                              double C_cal) {
  GronwallFit fit;
  fit.C_cal = C_cal;
  fit.elapsed = elapsed;
  fit.f = f;
  fit.finite_constant = std::isfinite(C_cal) && C_cal > 0.0;
  for (double s : elapsed) {
    double u = envelope_time(e, s);
    double cm = C_cal * mu_norm * std::pow(u, e.mu_exp);
    double cb = C_cal * b_norm * std::pow(u, e.b_exp);
    fit.c_mu_curve.push_back(cm);
    fit.c_b_curve.push_back(cb);
    auto roots = gronwall_roots(cm, cb);
    fit.envelope.push_back(roots ? roots->first : kNaN);
  }
  const double P = 4.0 * C_cal * C_cal * mu_norm * b_norm;
  const double ex = e.mu_exp + e.b_exp;
  if (P == 0.0)
    fit.horizon = kInf;
  else if (e.long_time && P < 1.0)
    fit.horizon = kInf;
  else if (ex > 0.0)
    fit.horizon = std::pow(P, -1.0 / ex);
  else
    fit.horizon = (ex == 0.0 && P < 1.0) ? kInf : 0.0;
  return fit;
}

double calibrate_gronwall_split(const std::vector<double>& elapsed, const std::vector<double>& f,
                                const std::vector<double>& f_free, const std::vector<double>& f_drift,
                                const EnvelopeExponents& e, double mu_norm, double b_norm) {
  double C = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    double u = envelope_time(e, elapsed[j]);
    double a = mu_norm * std::pow(u, e.mu_exp);
    double q = b_norm * std::pow(u, e.b_exp) * f[j] * f[j];
    if (f_free[j] > 0.0) C = std::max(C, a > 0.0 ? f_free[j] / a : kInf);
    if (f_drift[j] > 0.0) C = std::max(C, q > 0.0 ? f_drift[j] / q : kInf);
  }
  return C;
}

GronwallFit gronwall_envelope(const DensityPath& path, const ParameterSet& ps, Regime regime,
                              double mu_norm, double b_norm, std::optional<double> C_cal) {
  auto f = weighted_sup_path(path, path.gamma_meta, path.norm_spec, ps.alpha);
  std::vector<double> elapsed(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) elapsed[j] = path.elapsed(j);
  auto e = envelope_exponents(ps, regime);
  double C = 0.0;
  if (C_cal) {
    C = *C_cal;
  } else {
    SolverConfig cfg;
    cfg.alpha = ps.alpha;
    cfg.dt = path.size() > 0 ? path.times[0] - path.t0 : 1.0;
    DensityPath free = duhamel_map(zero_kernel(path.grid, path.t0, path.times.back()), path, cfg);
    DensityPath drift = path;
    for (std::size_t j = 0; j < path.size(); ++j) drift.frames[j] = path.frames[j] - free.frames[j];
    auto ff = weighted_sup_path(free, path.gamma_meta, path.norm_spec, ps.alpha);
    auto fd = weighted_sup_path(drift, path.gamma_meta, path.norm_spec, ps.alpha);
    C = calibrate_gronwall_split(elapsed, f, ff, fd, e, mu_norm, b_norm);
  }
  return gronwall_envelope(elapsed, f, e, mu_norm, b_norm, C);
}

bool envelope_holds(const GronwallFit& fit) {
  if (!fit.finite_constant) return false;
  for (std::size_t j = 0; j < fit.f.size(); ++j) {
    if (!(fit.elapsed[j] < fit.horizon)) continue;
    if (!(fit.f[j] <= fit.envelope[j] * (1.0 + 1e-12))) return false;
  }
  return true;
}

double initial_data_norm(const GridFunction& mu, const ParameterSet& ps) {
  auto dq = gamma_exponents(ps);
  return thermic_besov_norm(mu, {dq.beta0_bar, dq.p0_bar, dq.q0_bar}, ps.alpha, plain_options()).total;
}

double kernel_norm(const TimeKernel& b, const ParameterSet& ps) {
  const BesovSpec spec{ps.beta, ps.p, ps.q};
  const double tau = (b.S - b.t0) / static_cast<double>(b.slabs.size());
  double acc = 0.0;
  for (const auto& slab : b.slabs) {
    double v = thermic_besov_norm(slab, spec, ps.alpha, plain_options()).total +
               thermic_besov_norm(divergence(slab), spec, ps.alpha, plain_options()).total;
    if (std::isinf(ps.r))
      acc = std::max(acc, v);
    else
      acc += tau * std::pow(v, ps.r);
  }
  return std::isinf(ps.r) ? acc : std::pow(acc, 1.0 / ps.r);
}

CauchyTable cauchy_table(std::vector<DensityPath> paths, const std::vector<double>& epsilons,
                         double alpha_ref) {
  CauchyTable t;
  t.epsilons = epsilons;
  t.paths = std::move(paths);
  for (std::size_t k = 0; k + 1 < t.paths.size(); ++k) {
    const auto& a = t.paths[k];
    const auto& n = t.paths[k + 1];
    t.besov_diff.push_back(weighted_distance(a, n, alpha_ref));
    double l1 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) l1 = std::max(l1, lp_norm(a.frames[j] - n.frames[j], 1.0));
    t.l1_diff.push_back(l1);
  }
  std::size_t m = t.besov_diff.size();
  if (m >= 2 && (t.besov_diff[m - 1] > t.besov_diff[m - 2] || t.l1_diff[m - 1] > t.l1_diff[m - 2]))
    t.converging = false;
  return t;
}

CauchyTable cauchy_sweep(const TimeKernel& b, const GridFunction& mu, double t0, double S,
                         const std::vector<double>& epsilons, const SolverConfig& cfg) {
  std::vector<DensityPath> paths;
  for (double e : epsilons) {
    SolverConfig c = cfg;
    c.epsilon = e;
    paths.push_back(solve_mollified_fp(mollify(b, e), mu, t0, S, c));
  }
  return cauchy_table(std::move(paths), epsilons, cfg.alpha);
}

double limit_duhamel_residual(const DensityPath& path, const TimeKernel& b, const SolverConfig& cfg) {
  return weighted_distance(duhamel_map(b, path, cfg), path, cfg.alpha);
}

double drift_integrability(const DensityPath& path, const TimeKernel& b, double r_theta,
                           double theta, double r, double alpha) {
  if (!(r_theta > alpha && r_theta < r))
    throw RefusedError("drift_integrability: r_theta must lie in (alpha, r)");
  ThermicNormEvaluator eval(path.grid, {-theta, kInf, kInf}, alpha, plain_options());
  std::vector<double> n(path.size());
  parallel_for(path.size(), [&](std::size_t j) {
    n[j] = eval(convolution_drift(b.at(path.times[j]), path.frames[j])).total;
  });
  double acc = 0.0, prev = path.t0;
  for (std::size_t j = 0; j < n.size(); ++j) {
    acc += (path.times[j] - prev) * std::pow(n[j], r_theta);
    prev = path.times[j];
  }
  return std::pow(acc, 1.0 / r_theta);
}

LongTimeGate long_time_gate(const ParameterSet& ps, double C_cal, double mu_norm, double b_norm) {
  LongTimeGate g;
  g.C_cal = C_cal;
  g.mu_norm = mu_norm;
  g.b_norm = b_norm;
  auto dq = gamma_exponents(ps);
  double c0 = C_cal * mu_norm, cb = C_cal * b_norm;
  g.horizon = cb > 0.0 ? time_horizon(c0, cb, dq.horizon_denominator) : kInf;
  g.gate = cb > 0.0 ? 1.0 / (4.0 * C_cal * cb) : kInf;
  return g;
}

WeightedRun solve_fp_longtime(const TimeKernel& b_eps, const GridFunction& mu, double t0, double S,
                              const SolverConfig& cfg, const ParameterSet& ps,
                              const LongTimeGate& gate) {
  auto lt = check_C3LT(ps);
  if (!lt.satisfied) throw RefusedError("long-time solver: C3LT violated");
  if (S - t0 > gate.horizon && !gate.small_data())
    throw RefusedError("long-time solver: ||mu|| = " + std::to_string(gate.mu_norm) +
                       " is above the smallness gate " + std::to_string(gate.gate) +
                       " and S - t0 exceeds the short-time horizon " + std::to_string(gate.horizon));
  SolverConfig c = solver_config(ps, Regime::long_time, cfg);
  WeightedRun run;
  run.path = solve_mollified_fp(b_eps, mu, t0, S, c);
  run.weighted = weighted_sup_path(run.path, c.weight, c.norm, ps.alpha);
  run.sup = run.weighted.empty() ? 0.0 : run.weighted.back();
  return run;
}

WeightedRun solve_fp_classical(const TimeKernel& b_eps, const GridFunction& mu, double t0, double S,
                               const SolverConfig& cfg, const ParameterSet& ps) {
  if (ps.theta != 0.0) throw RefusedError("classical solver: theta must be 0");
  if (!check_C2star(ps).satisfied) throw RefusedError("classical solver: C2* violated");
  SolverConfig c = solver_config(ps, Regime::classical, cfg);
  WeightedRun run;
  run.path = solve_mollified_fp(b_eps, mu, t0, S, c);
  run.weighted = weighted_sup_path(run.path, c.weight, c.norm, ps.alpha);
  run.sup = run.weighted.empty() ? 0.0 : run.weighted.back();
  return run;
}

PathReport path_report(const DensityPath& path, const TimeKernel& b, const SolverConfig& cfg,
                       const GronwallFit* fit) {
  PathReport r;
  const std::size_t n = path.size();
  r.s = path.times;
  r.mass.resize(n);
  r.besov_norm.resize(n);
  r.weighted_norm.resize(n);
  r.residual.resize(n);
  r.envelope.assign(n, std::numeric_limits<double>::quiet_NaN());
  DensityPath next = duhamel_map(b, path, cfg);
  ThermicNormEvaluator eval(path.grid, cfg.norm, cfg.alpha, plain_options());
  parallel_for(n, [&](std::size_t j) {
    r.mass[j] = path.frames[j].integral();
    r.besov_norm[j] = eval(path.frames[j]).total;
    r.weighted_norm[j] = weight(cfg.weight, path.elapsed(j)) * r.besov_norm[j];
    r.residual[j] = eval(path.frames[j] - next.frames[j]).total;
  });
  if (fit && fit->envelope.size() == n) r.envelope = fit->envelope;
  return r;
}

}  // namespace besov_mkv
