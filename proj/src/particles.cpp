#include "besov_mkv/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "besov_mkv/errors.hpp"
#include "besov_mkv/fokker_planck.hpp"
#include "besov_mkv/parallel.hpp"
#include "besov_mkv/stable_kernel.hpp"

namespace besov_mkv {

namespace {

constexpr std::int64_t kUnit1 = std::int64_t{1} << 32;  // 1d weight resolution
constexpr std::int64_t kUnit2 = std::int64_t{1} << 16;  // per-axis resolution in 2d

std::int64_t box_index(double x, double L) {
  return static_cast<std::int64_t>(std::floor((x + L) / (2.0 * L)));
}

// Cell index and integer weight of the upper neighbour along one axis.
void cic_axis(double x, const Grid& g, std::int64_t unit, int& j, std::int64_t& w_hi) {
  double u = (wrap(x, g.L) + g.L) / g.spacing();
  double fl = std::floor(u);
  j = static_cast<int>(fl) % g.N;
  if (j < 0) j += g.N;
  w_hi = std::llround((u - fl) * static_cast<double>(unit));
  w_hi = std::clamp<std::int64_t>(w_hi, 0, unit);
}

bool is_time(const std::vector<double>& grid, double t, std::size_t& idx) {
  auto it = std::lower_bound(grid.begin(), grid.end(), t - 1e-9);
  if (it == grid.end() || std::abs(*it - t) > 1e-9) return false;
  idx = static_cast<std::size_t>(it - grid.begin());
  return true;
}

const GridFunction& frame_at(const DensityPath& path, double t) {
  if (std::abs(t - path.t0) <= 1e-9) return path.initial;
  std::size_t j = 0;
  if (!is_time(path.times, t, j)) throw RefusedError("young: time is not a path node");
  return path.frames[j];
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double ParticleEnsemble::wrapped(std::size_t i, int c) const {
  return wrap(positions[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)], grid.L);
}

ParticleEnsemble sample_initial(const GridFunction& mu, std::size_t N, double alpha, std::uint64_t seed) {
  const Grid& g = mu.grid();
  ParticleEnsemble e;
  e.grid = g;
  e.d = g.d;
  e.alpha = alpha;
  e.positions.resize(N * static_cast<std::size_t>(g.d));
  e.streams.reserve(N);
  for (std::size_t i = 0; i < N; ++i) e.streams.push_back(Rng::stream(seed, i));
  const double h = g.spacing();

  if (g.d == 1) {
    std::vector<double> cdf(g.N + 1, 0.0);
    for (int j = 0; j < g.N; ++j) {
      double a = std::max(mu[j], 0.0), b = std::max(mu[(j + 1) % g.N], 0.0);
      cdf[j + 1] = cdf[j] + 0.5 * h * (a + b);
    }
    if (!(cdf.back() > 0.0)) throw DomainError("sample_initial: density has no mass");
    parallel_for(N, [&](std::size_t i) {
      double u = e.streams[i].uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      int j = std::clamp(static_cast<int>(it - cdf.begin()) - 1, 0, g.N - 1);
      double span = cdf[j + 1] - cdf[j];
      double frac = span > 0.0 ? (u - cdf[j]) / span : 0.5;
      e.positions[i] = g.coordinate(j) + frac * h;
    });
  } else {
    double top = 0.0;
    for (double v : mu.values()) top = std::max(top, v);
    if (!(top > 0.0)) throw DomainError("sample_initial: density has no mass");
    parallel_for(N, [&](std::size_t i) {
      auto& rng = e.streams[i];
      for (;;) {
        double x[2] = {-g.L + 2.0 * g.L * rng.uniform(), -g.L + 2.0 * g.L * rng.uniform()};
        if (rng.uniform() * top <= interpolate_linear(mu, 0, x)) {
          e.positions[2 * i] = x[0];
          e.positions[2 * i + 1] = x[1];
          break;
        }
      }
    });
  }
  return e;
}

GridFunction empirical_density(const std::vector<double>& positions, int d, const Grid& grid,
                               double bandwidth) {
  if (d != grid.d) throw std::invalid_argument("empirical_density: dimension mismatch");
  const std::size_t N = positions.size() / static_cast<std::size_t>(d);
  if (N == 0) throw std::invalid_argument("empirical_density: no particles");
  const std::size_t chunks = static_cast<std::size_t>(std::max(1, thread_count()));
  std::vector<std::vector<std::int64_t>> partial(chunks, std::vector<std::int64_t>(grid.size(), 0));
  const std::size_t per = (N + chunks - 1) / chunks;
  parallel_for(chunks, [&](std::size_t c) {
    auto& counts = partial[c];
    for (std::size_t i = c * per; i < std::min(N, (c + 1) * per); ++i) {
      if (d == 1) {
        int j;
        std::int64_t w;
        cic_axis(positions[i], grid, kUnit1, j, w);
        counts[j] += kUnit1 - w;
        counts[(j + 1) % grid.N] += w;
      } else {
        int j1, j2;
        std::int64_t w1, w2;
        cic_axis(positions[2 * i], grid, kUnit2, j1, w1);
        cic_axis(positions[2 * i + 1], grid, kUnit2, j2, w2);
        const int n = grid.N;
        int k1 = (j1 + 1) % n, k2 = (j2 + 1) % n;
        counts[static_cast<std::size_t>(j1) * n + j2] += (kUnit2 - w1) * (kUnit2 - w2);
        counts[static_cast<std::size_t>(j1) * n + k2] += (kUnit2 - w1) * w2;
        counts[static_cast<std::size_t>(k1) * n + j2] += w1 * (kUnit2 - w2);
        counts[static_cast<std::size_t>(k1) * n + k2] += w1 * w2;
      }
    }
  });
  const double unit = d == 1 ? static_cast<double>(kUnit1) : static_cast<double>(kUnit2 * kUnit2);
  GridFunction rho(grid, 1);
  const double scale = 1.0 / (static_cast<double>(N) * unit * grid.cell_volume());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::int64_t total = 0;
    for (const auto& p : partial) total += p[k];
    rho[k] = static_cast<double>(total) * scale;
  }
  if (bandwidth <= 0.0) return rho;
  Spectrum s = to_spectrum(rho);
  const auto& mag = mode_magnitudes(grid);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::exp(-0.5 * bandwidth * bandwidth * mag[i] * mag[i]);
  return from_spectrum(s);
}

GridFunction kde_smooth(const GridFunction& rho, double bandwidth) {
  const Grid& g = rho.grid();
  Spectrum s = to_spectrum(rho);
  const double h = g.spacing();
  for (int c = 0; c < g.d; ++c) {
    const auto& xi = mode_component(g, c);
    for (std::size_t i = 0; i < s.size(); ++i) {
      // Transfer function of linear (hat) binning.
      double a = 0.5 * xi[i] * h;
      double sinc = a == 0.0 ? 1.0 : std::sin(a) / a;
      s[i] *= sinc * sinc;
    }
  }
  const auto& mag = mode_magnitudes(g);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] *= std::exp(-0.5 * bandwidth * bandwidth * mag[i] * mag[i]);
  return from_spectrum(s);
}

Trajectory simulate(const TimeKernel& b_eps, const GridFunction& mu, double alpha, double t0,
                    double S, std::size_t N, double dt, std::uint64_t seed,
                    const SimulationOptions& opts) {
  if (N < 100) throw DomainError("simulate: at least 100 particles required");
  if (!(dt > 0.0) || !(S > t0)) throw DomainError("simulate: need dt > 0 and S > t0");
  const Grid& g = mu.grid();
  if (!(b_eps.grid() == g)) throw std::invalid_argument("simulate: kernel grid mismatch");
  const auto steps = static_cast<std::size_t>(std::llround((S - t0) / dt));
  const int d = g.d;
  const double bw = opts.bandwidth_cells * g.spacing();
  const bool zero = b_eps.is_zero();

  Trajectory tr;
  tr.grid = g;
  tr.alpha = alpha;
  tr.t0 = t0;
  tr.dt = dt;
  ParticleEnsemble e = sample_initial(mu, N, alpha, seed);
  e.time = t0;
  tr.times.push_back(t0);
  tr.positions.push_back(e.positions);

  std::vector<std::int64_t> wraps(N, 0);
  std::vector<char> unstable(N, 0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    GridFunction B;
    if (!zero) B = convolution_drift(b_eps.at(t), empirical_density(e.positions, d, g, bw));
    parallel_for(N, [&](std::size_t i) {
      double* x = &e.positions[i * static_cast<std::size_t>(d)];
      double w[2] = {wrap(x[0], g.L), d == 2 ? wrap(x[1], g.L) : 0.0};
      auto inc = sample_stable_increment(alpha, dt, d, e.streams[i]);
      for (int c = 0; c < d; ++c) {
        double drift = zero ? 0.0 : interpolate_linear(B, c, std::span<const double>(w, d)) * dt;
        if (!(std::abs(drift) <= 6.0 * g.L)) unstable[i] = 1;
        double before = box_index(x[c], g.L);
        x[c] += drift + inc[c];
        wraps[i] += std::abs(box_index(x[c], g.L) - before);
      }
    });
    if (std::any_of(unstable.begin(), unstable.end(), [](char c) { return c != 0; }))
      throw NumericError(NumericError::Kind::instability,
                         "simulate: drift moved a particle more than three box widths in one step");
    e.time = t + dt;
    if ((k + 1) % static_cast<std::size_t>(std::max(1, opts.record_every)) == 0 || k + 1 == steps) {
      tr.times.push_back(e.time);
      tr.positions.push_back(e.positions);
    }
  }
  e.wraps = std::accumulate(wraps.begin(), wraps.end(), std::int64_t{0});
  tr.wraps = e.wraps;
  tr.final = std::move(e);
  return tr;
}

std::vector<double> compare_to_fp(const Trajectory& traj, const DensityPath& path, double bandwidth,
                                  bool matched) {
  std::vector<double> out;
  for (std::size_t j = 0; j < path.size(); ++j) {
    std::size_t k = 0;
    if (!is_time(traj.times, path.times[j], k)) continue;
    GridFunction kde = empirical_density(traj.positions[k], traj.grid.d, traj.grid, bandwidth);
    GridFunction ref = matched ? kde_smooth(path.frames[j], bandwidth) : path.frames[j];
    out.push_back(lp_norm(kde - ref, 1.0));
  }
  return out;
}

YoungReconstruction young_reconstruction(const TimeKernel& b, const DensityPath& path,
                                         const Trajectory& traj, const std::vector<double>& partition) {
  if (partition.size() < 2) throw RefusedError("young: partition needs at least two points");
  std::vector<std::size_t> rec(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    if (i > 0 && !(partition[i] > partition[i - 1])) throw RefusedError("young: partition must increase");
    if (!is_time(traj.times, partition[i], rec[i]))
      throw RefusedError("young: partition point is not a recorded trajectory time");
  }
  const Grid& g = path.grid;
  const int d = g.d;
  const std::size_t N = traj.particles();
  const auto& mag = mode_magnitudes(g);
  const double alpha = traj.alpha;

  auto drift_hat = [&](double v) {
    std::vector<Spectrum> out;
    Spectrum r = to_spectrum(frame_at(path, v));
    const GridFunction& bv = b.at(v);
    for (int c = 0; c < d; ++c) {
      Spectrum s = to_spectrum(bv, c);
      s *= r;
      out.push_back(std::move(s));
    }
    return out;
  };
  auto sample = [&](const GridFunction& field, const std::vector<double>& pos, std::vector<double>& out,
                    double scale) {
    out.assign(N * static_cast<std::size_t>(d), 0.0);
    parallel_for(N, [&](std::size_t i) {
      double w[2] = {wrap(pos[i * d], g.L), d == 2 ? wrap(pos[i * d + 1], g.L) : 0.0};
      for (int c = 0; c < d; ++c)
        out[i * d + c] = scale * interpolate_linear(field, c, std::span<const double>(w, d));
    });
  };

  YoungReconstruction y;
  y.partition = partition;
  y.riemann_sum.assign(N * static_cast<std::size_t>(d), 0.0);
  y.reference.assign(N * static_cast<std::size_t>(d), 0.0);
  std::vector<double> buf;

  for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
    const double a = partition[i], e = partition[i + 1];
    std::vector<double> nodes{a};
    for (double t : path.times)
      if (t > a + 1e-9 && t < e + 1e-9) nodes.push_back(t);
    if (nodes.size() < 2) throw RefusedError("young: interval contains no path node");
    std::vector<Spectrum> acc(d, Spectrum(g));
    for (std::size_t m = 0; m < nodes.size(); ++m) {
      double wq = 0.0;
      if (m > 0) wq += 0.5 * (nodes[m] - nodes[m - 1]);
      if (m + 1 < nodes.size()) wq += 0.5 * (nodes[m + 1] - nodes[m]);
      auto dh = drift_hat(nodes[m]);
      const double lag = nodes[m] - a;
      for (int c = 0; c < d; ++c)
        for (std::size_t k = 0; k < acc[c].size(); ++k)
          acc[c][k] += wq * std::exp(-lag * std::pow(mag[k], alpha)) * dh[c][k];
    }
    GridFunction A(g, d);
    for (int c = 0; c < d; ++c) from_spectrum_into(acc[c], A.component(c));
    sample(A, traj.positions[rec[i]], buf, 1.0);
    for (std::size_t k = 0; k < buf.size(); ++k) y.riemann_sum[k] += buf[k];
    y.pseudo_increments.push_back(buf);
  }

  for (std::size_t k = rec.front(); k < rec.back(); ++k) {
    const double t = traj.times[k], step = traj.times[k + 1] - t;
    auto dh = drift_hat(t);
    GridFunction B(g, d);
    for (int c = 0; c < d; ++c) from_spectrum_into(dh[c], B.component(c));
    sample(B, traj.positions[k], buf, step);
    for (std::size_t m = 0; m < buf.size(); ++m) y.reference[m] += buf[m];
  }

  double gap = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      double diff = y.riemann_sum[i * d + c] - y.reference[i * d + c];
      s += diff * diff;
    }
    gap += std::sqrt(s);
  }
  y.gap = gap / static_cast<double>(N);
  return y;
}

std::vector<double> pathwise_probe_d1(const TimeKernel& b, const GridFunction& mu, double alpha,
                                      double t0, double S, std::size_t N, double dt, double epsilon,
                                      std::uint64_t shared_seed, const SimulationOptions& opts) {
  if (mu.grid().d != 1) throw DomainError("pathwise probe: d = 1 only");
  auto x = simulate(mollify(b, epsilon), mu, alpha, t0, S, N, dt, shared_seed, opts);
  auto y = simulate(mollify(b, 0.5 * epsilon), mu, alpha, t0, S, N, dt, shared_seed, opts);
  std::vector<double> gap;
  for (std::size_t k = 0; k < x.times.size(); ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += std::abs(x.positions[k][i] - y.positions[k][i]);
    gap.push_back(s / static_cast<double>(N));
  }
  return gap;
}

TightnessFit tightness_moments(const Trajectory& traj, double lambda, const std::vector<int>& lag_steps,
                               double xi_min) {
  TightnessFit fit;
  const int d = traj.grid.d;
  const std::size_t N = traj.particles();
  std::vector<double> lx, ly;
  for (int lag : lag_steps) {
    if (lag <= 0 || static_cast<std::size_t>(lag) >= traj.times.size()) {
      fit.lags.push_back(0.0);
      fit.moments.push_back(0.0);
      continue;
    }
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j + static_cast<std::size_t>(lag) < traj.times.size(); ++j) {
      const auto& a = traj.positions[j];
      const auto& b = traj.positions[j + static_cast<std::size_t>(lag)];
      for (std::size_t i = 0; i < N; ++i) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
          double diff = b[i * d + c] - a[i * d + c];
          s += diff * diff;
        }
        acc += std::pow(std::sqrt(s), lambda);
        ++count;
      }
    }
    double tau = traj.times[static_cast<std::size_t>(lag)] - traj.times[0];
    double m = acc / static_cast<double>(count);
    fit.lags.push_back(tau);
    fit.moments.push_back(m);
    lx.push_back(std::log(tau));
    ly.push_back(std::log(m));
  }
  if (lx.size() >= 2) fit.slope = fit_slope(lx, ly);
  fit.passes = traj.alpha == 2.0 ? fit.slope >= 1.0 + xi_min : fit.slope >= xi_min;
  return fit;
}

TrajectorySummary summarize_trajectory(const Trajectory& traj, const DensityPath& path, double bandwidth) {
  TrajectorySummary out;
  const int d = traj.grid.d;
  const std::size_t N = traj.particles();
  out.s = traj.times;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const auto& x = traj.positions[k];
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (int c = 0; c < d; ++c) mean[c] += x[i * d + c];
    for (auto& m : mean) m /= static_cast<double>(N);
    double var = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      for (int c = 0; c < d; ++c) var += (x[i * d + c] - mean[c]) * (x[i * d + c] - mean[c]);
    out.mean.push_back(mean[0]);
    out.var.push_back(var / static_cast<double>(N));

    double l1 = std::numeric_limits<double>::quiet_NaN();
    const GridFunction* ref = nullptr;
    std::size_t j = 0;
    if (std::abs(traj.times[k] - path.t0) < 1e-12 && path.initial.points() > 0)
      ref = &path.initial;
    else if (is_time(path.times, traj.times[k], j))
      ref = &path.frames[j];
    if (ref) {
      GridFunction kde = empirical_density(x, d, traj.grid, bandwidth);
      l1 = lp_norm(kde - kde_smooth(*ref, bandwidth), 1.0);
    }
    out.l1_to_fp.push_back(l1);
  }
  return out;
}

}  // namespace besov_mkv
