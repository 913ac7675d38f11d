#include "besov_mkv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "besov_mkv/besov.hpp"
#include "besov_mkv/errors.hpp"
#include "besov_mkv/rng.hpp"

namespace besov_mkv {

namespace {

int signed_index(int k, int N) { return k <= N / 2 ? k : k - N; }

std::uint64_t mode_key(int k1, int k2) {
  return (static_cast<std::uint64_t>(k1 + (1 << 20)) << 21) |
         static_cast<std::uint64_t>(k2 + (1 << 20));
}

// Standard complex normal attached to wavevector (k1, k2), Hermitian in k.
Complex keyed_normal(std::uint64_t seed, int k1, int k2) {
  bool canonical = k1 > 0 || (k1 == 0 && k2 > 0);
  int c1 = canonical ? k1 : -k1, c2 = canonical ? k2 : -k2;
  Rng rng = Rng::stream(seed, mode_key(c1, c2));
  double re = rng.normal(), im = rng.normal();
  Complex z(re / std::numbers::sqrt2, im / std::numbers::sqrt2);
  return canonical ? z : std::conj(z);
}

std::uint64_t slab_seed(std::uint64_t seed, int slab) {
  return slab == 0 ? seed : Rng::stream(seed, 0xA5A5ULL + static_cast<std::uint64_t>(slab)).next_u64();
}

}  // namespace

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "random_fourier") return KernelFamily::random_fourier;
  if (name == "fractional_derivative_gaussian") return KernelFamily::fractional_derivative_gaussian;
  if (name == "gradient_potential") return KernelFamily::gradient_potential;
  throw std::invalid_argument("unknown kernel family: " + name);
}

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::random_fourier: return "random_fourier";
    case KernelFamily::fractional_derivative_gaussian: return "fractional_derivative_gaussian";
    case KernelFamily::gradient_potential: return "gradient_potential";
  }
  return "?";
}

void KernelSpec::validate() const {
  if (!(beta > -2.0 && beta <= 0.0)) throw DomainError("kernel: beta must lie in (-2, 0]");
  if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("kernel: p, q must be >= 1");
  if (slabs < 1 || slabs > 8) throw DomainError("kernel: slabs must be in 1..8");
  if (!(amplitude >= 0.0) || !(width > 0.0) || !(cutoff >= 0.0))
    throw DomainError("kernel: amplitude, width, cutoff must be positive");
}

const GridFunction& TimeKernel::at(double s) const {
  if (slabs.size() == 1) return slabs.front();
  double tau = (S - t0) / static_cast<double>(slabs.size());
  long k = static_cast<long>(std::floor((s - t0) / tau));
  k = std::clamp<long>(k, 0, static_cast<long>(slabs.size()) - 1);
  return slabs[static_cast<std::size_t>(k)];
}

bool TimeKernel::is_zero() const {
  for (const auto& b : slabs)
    for (double v : b.values())
      if (v != 0.0) return false;
  return true;
}

TimeKernel static_kernel(GridFunction b, double t0, double S) {
  TimeKernel k;
  k.slabs.push_back(std::move(b));
  k.t0 = t0;
  k.S = S;
  return k;
}

TimeKernel zero_kernel(const Grid& grid, double t0, double S) {
  return static_kernel(GridFunction(grid, grid.d), t0, S);
}

GridFunction synthesize_kernel(const KernelSpec& spec, const Grid& grid, int slab) {
  spec.validate();
  if (grid.N < 64) throw RefusedError("kernel: N < 64 cannot resolve the regularity probe");
  const int d = grid.d, N = grid.N;
  const double vol = std::pow(2.0 * grid.L, d);
  const auto& mag = mode_magnitudes(grid);
  std::vector<Spectrum> comps(d, Spectrum(grid));
  const std::uint64_t seed = slab_seed(spec.seed, slab);
  const double w = spec.width;

  for (std::size_t i = 0; i < grid.size(); ++i) {
    int k1 = d == 1 ? static_cast<int>(i) : static_cast<int>(i / N);
    int k2 = d == 1 ? 0 : static_cast<int>(i % N);
    if (k1 == N / 2 || (d == 2 && k2 == N / 2)) continue;
    double r = mag[i];
    if (r == 0.0) continue;
    if (spec.cutoff > 0.0 && r > spec.cutoff) continue;
    double xi[2] = {mode_component(grid, 0)[i], d == 2 ? mode_component(grid, 1)[i] : 0.0};
    switch (spec.family) {
      case KernelFamily::random_fourier: {
        Complex g = keyed_normal(seed, signed_index(k1, N), signed_index(k2, N));
        double sigma = std::pow(1.0 + r, -spec.beta - d / 2.0);
        Complex c = vol * sigma * g;
        if (d == 1) {
          comps[0][i] = c;
        } else {
          // Divergence-free arrangement: i xi_perp / |xi| times the scalar coefficient.
          comps[0][i] = Complex(0.0, -xi[1] / r) * c;
          comps[1][i] = Complex(0.0, xi[0] / r) * c;
        }
        break;
      }
      case KernelFamily::fractional_derivative_gaussian: {
        double s = std::pow(1.0 / (w * w) + r * r, (-spec.beta - d - 1.0) / 2.0);
        for (int c = 0; c < d; ++c) comps[c][i] = Complex(0.0, -xi[c] * s);
        break;
      }
      case KernelFamily::gradient_potential: {
        double v = std::pow(2.0 * std::numbers::pi * w * w, d / 2.0) * std::exp(-0.5 * w * w * r * r);
        for (int c = 0; c < d; ++c) comps[c][i] = Complex(0.0, -xi[c] * v);
        break;
      }
    }
  }
  GridFunction out(grid, d);
  for (int c = 0; c < d; ++c) {
    comps[c] *= spec.amplitude;
    from_spectrum_into(comps[c], out.component(c));
  }
  return out;
}

TimeKernel synthesize_time_kernel(const KernelSpec& spec, const Grid& grid, double t0, double S) {
  TimeKernel k;
  k.t0 = t0;
  k.S = S;
  for (int s = 0; s < spec.slabs; ++s) k.slabs.push_back(synthesize_kernel(spec, grid, s));
  return k;
}

GridFunction divergence(const GridFunction& b) {
  const Grid& g = b.grid();
  if (b.components() != g.d) throw std::invalid_argument("divergence: expected d components");
  Spectrum acc(g);
  for (int c = 0; c < g.d; ++c) {
    Spectrum s = to_spectrum(b, c);
    const auto& xi = mode_component(g, c);
    for (std::size_t i = 0; i < s.size(); ++i) acc[i] += Complex(0.0, xi[i]) * s[i];
  }
  return from_spectrum(acc);
}

GridFunction mollify(const GridFunction& b, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("mollify: epsilon must be positive");
  const Grid& g = b.grid();
  const auto& mag = mode_magnitudes(g);
  GridFunction out(g, b.components());
  for (int c = 0; c < b.components(); ++c) {
    Spectrum s = to_spectrum(b, c);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::exp(-0.5 * epsilon * epsilon * mag[i] * mag[i]);
    from_spectrum_into(s, out.component(c));
  }
  return out;
}

TimeKernel mollify(const TimeKernel& b, double epsilon) {
  TimeKernel out = b;
  for (auto& s : out.slabs) s = mollify(s, epsilon);
  return out;
}

bool mollifier_resolved(const Grid& grid, double epsilon) { return epsilon >= grid.spacing(); }

MollifierReport mollifier_report(const GridFunction& b, const KernelSpec& spec,
                                 const std::vector<double>& epsilons,
                                 const std::vector<double>& beta_bars, double alpha_ref) {
  MollifierReport rep;
  rep.epsilons = epsilons;
  rep.beta_bars = beta_bars;
  BesovOptions o;
  o.detect_divergence = false;
  const BesovSpec same{spec.beta, spec.p, spec.q};
  double base = thermic_besov_norm(b, same, alpha_ref, o).total;
  std::vector<GridFunction> moll;
  for (double e : epsilons) {
    if (!mollifier_resolved(b.grid(), e))
      rep.warnings.push_back("mollifier under-resolved at eps = " + std::to_string(e));
    moll.push_back(mollify(b, e));
    if (base > 0.0)
      rep.sup_norm_ratio =
          std::max(rep.sup_norm_ratio, thermic_besov_norm(moll.back(), same, alpha_ref, o).total / base);
  }
  for (double bb : beta_bars) {
    std::vector<double> row;
    for (const auto& m : moll)
      row.push_back(thermic_besov_norm(b - m, {bb, spec.p, spec.q}, alpha_ref, o).total);
    rep.convergence_table.push_back(std::move(row));
  }
  return rep;
}

RegularityProbe regularity_probe(const KernelSpec& spec, const Grid& coarse, double gamma,
                                 double alpha_ref, int levels) {
  if (levels < 2) throw std::invalid_argument("regularity_probe: need at least 2 levels");
  RegularityProbe out;
  BesovOptions o;
  o.detect_divergence = false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int l = 0; l < levels; ++l) {
    Grid g(coarse.d, coarse.L, coarse.N << l);
    double n = thermic_besov_norm(synthesize_kernel(spec, g), {gamma, spec.p, spec.q}, alpha_ref, o).total;
    out.resolutions.push_back(g.N);
    out.norms.push_back(n);
    double x = std::log(static_cast<double>(g.N)), y = std::log(n);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double m = levels;
  out.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  out.diverged = out.slope > 0.05;
  return out;
}

}  // namespace besov_mkv
