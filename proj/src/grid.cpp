#include "besov_mkv/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>

#include "besov_mkv/errors.hpp"

namespace besov_mkv {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW plans are created under a lock and executed through the new-array
// interface, which is thread safe.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plans] : plans_) {
      fftw_destroy_plan(plans.forward);
      fftw_destroy_plan(plans.backward);
    }
  }

  PlanPair get(int d, int N) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(d, N);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(N);
    auto* buf = fftw_alloc_complex(total);
    int dims[2] = {N, N};
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft(d, dims, buf, buf, FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft(d, dims, buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    plans_[key] = p;
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(fftw_plan plan, std::vector<Complex>& data) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

// (-1)^(k1 + k2): shifts the DFT phase origin from node 0 (x = -L) to the
// physical origin at node N/2.
double origin_sign(const Grid& g, std::size_t flat) {
  if (g.d == 1) return (flat % 2 == 0) ? 1.0 : -1.0;
  std::size_t k1 = flat / static_cast<std::size_t>(g.N);
  std::size_t k2 = flat % static_cast<std::size_t>(g.N);
  return ((k1 + k2) % 2 == 0) ? 1.0 : -1.0;
}

struct ModeTables {
  std::vector<double> magnitude;
  std::vector<std::vector<double>> component;
};

const ModeTables& mode_tables(const Grid& grid) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, int>, std::unique_ptr<ModeTables>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_tuple(grid.d, grid.L, grid.N);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;
  auto tables = std::make_unique<ModeTables>();
  const std::size_t n = grid.size();
  tables->magnitude.resize(n);
  tables->component.assign(grid.d, std::vector<double>(n));
  const int N = grid.N;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (int c = 0; c < grid.d; ++c) {
      int k = (grid.d == 1) ? static_cast<int>(i)
                            : (c == 0 ? static_cast<int>(i / N) : static_cast<int>(i % N));
      double xi = grid.frequency(k);
      sq += xi * xi;
      tables->component[c][i] = (k == N / 2) ? 0.0 : xi;
    }
    tables->magnitude[i] = std::sqrt(sq);
  }
  auto& ref = *tables;
  cache.emplace(key, std::move(tables));
  return ref;
}

}  // namespace

Grid::Grid(int d_, double L_, int N_) : d(d_), L(L_), N(N_) {
  if (d != 1 && d != 2) throw DomainError("grid dimension must be 1 or 2");
  if (!(L > 0.0)) throw DomainError("grid half-width must be positive");
  if (N < 8 || !is_power_of_two(N)) throw DomainError("grid size must be a power of two >= 8");
}

double Grid::cell_volume() const { return std::pow(spacing(), d); }

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(N);
  return n;
}

double Grid::frequency(int k) const {
  int signed_k = (k <= N / 2) ? k : k - N;
  return std::numbers::pi * signed_k / L;
}

double Grid::nyquist() const { return std::numbers::pi / spacing(); }

GridFunction::GridFunction(const Grid& grid, int components)
    : grid_(grid), components_(components), values_(grid.size() * components, 0.0) {}

GridFunction::GridFunction(const Grid& grid, int components, std::vector<double> values)
    : grid_(grid), components_(components), values_(std::move(values)) {
  if (values_.size() != grid.size() * static_cast<std::size_t>(components))
    throw std::invalid_argument("GridFunction: value count does not match grid");
}

std::span<double> GridFunction::component(int c) {
  return {values_.data() + c * points(), points()};
}

std::span<const double> GridFunction::component(int c) const {
  return {values_.data() + c * points(), points()};
}

double GridFunction::integral(int c) const {
  double s = 0.0;
  for (double v : component(c)) s += v;
  return s * grid_.cell_volume();
}

bool GridFunction::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  if (o.values_.size() != values_.size()) throw std::invalid_argument("shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  if (o.values_.size() != values_.size()) throw std::invalid_argument("shape mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

GridFunction GridFunction::sample(const Grid& grid,
                                  const std::function<double(std::span<const double>)>& f) {
  GridFunction out(grid, 1);
  double x[2] = {0.0, 0.0};
  const int N = grid.N;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.d == 1) {
      x[0] = grid.coordinate(static_cast<int>(i));
    } else {
      x[0] = grid.coordinate(static_cast<int>(i / N));
      x[1] = grid.coordinate(static_cast<int>(i % N));
    }
    out[i] = f(std::span<const double>(x, grid.d));
  }
  return out;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(double s, GridFunction a) { return a *= s; }

Spectrum::Spectrum(const Grid& grid) : grid_(grid), data_(grid.size()) {}

Spectrum& Spectrum::operator*=(const Spectrum& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] *= o.data_[i];
  return *this;
}

Spectrum& Spectrum::operator+=(const Spectrum& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Spectrum& Spectrum::operator-=(const Spectrum& o) {
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Spectrum& Spectrum::operator*=(double s) {
  for (auto& z : data_) z *= s;
  return *this;
}

Spectrum to_spectrum(const GridFunction& f, int c) {
  const Grid& g = f.grid();
  Spectrum s(g);
  auto vals = f.component(c);
  auto& data = s.data();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = Complex(vals[i], 0.0);
  execute(plan_cache().get(g.d, g.N).forward, data);
  const double vol = g.cell_volume();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= vol * origin_sign(g, i);
  return s;
}

void from_spectrum_into(const Spectrum& s, std::span<double> out) {
  const Grid& g = s.grid();
  std::vector<Complex> data(s.data());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= origin_sign(g, i);
  execute(plan_cache().get(g.d, g.N).backward, data);
  const double scale = 1.0 / std::pow(2.0 * g.L, g.d);
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real() * scale;
}

GridFunction from_spectrum(const Spectrum& s) {
  GridFunction f(s.grid(), 1);
  from_spectrum_into(s, f.component(0));
  return f;
}

void for_each_mode(const Grid& grid,
                   const std::function<void(std::size_t, std::span<const double>)>& fn) {
  const auto& t = mode_tables(grid);
  double xi[2] = {0.0, 0.0};
  const int N = grid.N;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.d == 1) {
      xi[0] = grid.frequency(static_cast<int>(i));
    } else {
      xi[0] = grid.frequency(static_cast<int>(i / N));
      xi[1] = grid.frequency(static_cast<int>(i % N));
    }
    (void)t;
    fn(i, std::span<const double>(xi, grid.d));
  }
}

const std::vector<double>& mode_magnitudes(const Grid& grid) { return mode_tables(grid).magnitude; }

const std::vector<double>& mode_component(const Grid& grid, int c) {
  return mode_tables(grid).component.at(c);
}

GridFunction convolve(const GridFunction& f, const GridFunction& g) {
  if (!(f.grid() == g.grid())) throw std::invalid_argument("convolve: grid mismatch");
  Spectrum a = to_spectrum(f);
  a *= to_spectrum(g);
  return from_spectrum(a);
}

GridFunction discrete_dirac(const Grid& grid) {
  GridFunction f(grid, 1);
  std::size_t centre = (grid.d == 1) ? grid.N / 2
                                     : static_cast<std::size_t>(grid.N / 2) * grid.N + grid.N / 2;
  f[centre] = 1.0 / grid.cell_volume();
  return f;
}

double fourier_interpolate(const Spectrum& s, std::span<const double> x) {
  const Grid& g = s.grid();
  const double scale = 1.0 / std::pow(2.0 * g.L, g.d);
  double acc = 0.0;
  const int N = g.N;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double phase;
    bool nyq;
    if (g.d == 1) {
      int k = static_cast<int>(i);
      nyq = (k == N / 2);
      phase = g.frequency(k) * x[0];
    } else {
      int k1 = static_cast<int>(i / N), k2 = static_cast<int>(i % N);
      nyq = (k1 == N / 2 || k2 == N / 2);
      phase = g.frequency(k1) * x[0] + g.frequency(k2) * x[1];
    }
    // Nyquist modes are split symmetrically; only the cosine part survives.
    if (nyq)
      acc += s[i].real() * std::cos(phase);
    else
      acc += (s[i] * Complex(std::cos(phase), std::sin(phase))).real();
  }
  return acc * scale;
}

double wrap(double x, double L) {
  const double period = 2.0 * L;
  double y = std::fmod(x + L, period);
  if (y < 0.0) y += period;
  if (y >= period) y -= period;
  return y - L;
}

double interpolate_linear(const GridFunction& f, int c, std::span<const double> x) {
  const Grid& g = f.grid();
  const double h = g.spacing();
  const int N = g.N;
  auto vals = f.component(c);
  auto locate = [&](double xc, int& i0, double& frac) {
    double u = (wrap(xc, g.L) + g.L) / h;
    double fl = std::floor(u);
    i0 = static_cast<int>(fl) % N;
    if (i0 < 0) i0 += N;
    frac = u - fl;
  };
  int i0, j0;
  double fx, fy;
  locate(x[0], i0, fx);
  int i1 = (i0 + 1) % N;
  if (g.d == 1) return (1.0 - fx) * vals[i0] + fx * vals[i1];
  locate(x[1], j0, fy);
  int j1 = (j0 + 1) % N;
  auto at = [&](int i, int j) { return vals[static_cast<std::size_t>(i) * N + j]; };
  return (1.0 - fx) * ((1.0 - fy) * at(i0, j0) + fy * at(i0, j1)) +
         fx * ((1.0 - fy) * at(i1, j0) + fy * at(i1, j1));
}

}  // namespace besov_mkv
