#include "besov_mkv/io.hpp"

#include <openssl/evp.h>

#include "besov_mkv/errors.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <stdexcept>

namespace besov_mkv {

namespace fs = std::filesystem;

Json exponent_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? Json("inf") : Json("-inf");
  return Json(x);
}

double exponent_from_json(const Json& j) {
  if (j.is_string()) {
    auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf" || s == "infinity") return kInf;
    if (s == "-inf") return -kInf;
    return std::stod(s);
  }
  return j.get<double>();
}

Json to_json(const ParameterSet& ps) {
  Json j;
  j["alpha"] = ps.alpha;
  j["d"] = ps.d;
  j["r"] = exponent_to_json(ps.r);
  j["p"] = exponent_to_json(ps.p);
  j["q"] = exponent_to_json(ps.q);
  j["beta"] = ps.beta;
  j["beta0"] = ps.beta0;
  j["p0"] = exponent_to_json(ps.p0);
  j["q0"] = exponent_to_json(ps.q0);
  j["theta"] = ps.theta;
  j["theta_bar"] = exponent_to_json(ps.theta_bar);
  j["eta"] = ps.eta;
  j["delta"] = ps.delta;
  return j;
}

ParameterSet parameters_from_json(const Json& j) {
  static const std::set<std::string> known = {"alpha", "d",     "r",     "p",         "q",   "beta", "beta0",
                                              "p0",    "q0",    "theta", "theta_bar", "eta", "delta"};
  if (!j.is_object()) throw DomainError("parameter file must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw DomainError("unknown parameter key: " + it.key());
  ParameterSet ps;
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = exponent_from_json(j.at(key));
  };
  num("alpha", ps.alpha);
  if (j.contains("d")) ps.d = j.at("d").get<int>();
  num("r", ps.r);
  num("p", ps.p);
  num("q", ps.q);
  num("beta", ps.beta);
  num("beta0", ps.beta0);
  num("p0", ps.p0);
  num("q0", ps.q0);
  num("theta", ps.theta);
  num("theta_bar", ps.theta_bar);
  num("eta", ps.eta);
  num("delta", ps.delta);
  validate(ps);
  return ps;
}

Json to_json(const KernelSpec& k) {
  Json j;
  j["family"] = to_string(k.family);
  j["beta"] = k.beta;
  j["p"] = exponent_to_json(k.p);
  j["q"] = exponent_to_json(k.q);
  j["seed"] = k.seed;
  j["slabs"] = k.slabs;
  j["amplitude"] = k.amplitude;
  j["cutoff"] = k.cutoff;
  j["width"] = k.width;
  return j;
}

KernelSpec kernel_spec_from_json(const Json& j) {
  KernelSpec k;
  if (j.contains("family")) k.family = parse_kernel_family(j.at("family").get<std::string>());
  if (j.contains("beta")) k.beta = j.at("beta").get<double>();
  if (j.contains("p")) k.p = exponent_from_json(j.at("p"));
  if (j.contains("q")) k.q = exponent_from_json(j.at("q"));
  if (j.contains("seed")) k.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("slabs")) k.slabs = j.at("slabs").get<int>();
  if (j.contains("amplitude")) k.amplitude = j.at("amplitude").get<double>();
  if (j.contains("cutoff")) k.cutoff = j.at("cutoff").get<double>();
  if (j.contains("width")) k.width = j.at("width").get<double>();
  k.validate();
  return k;
}

Json to_json(const Grid& g) { return Json{{"d", g.d}, {"L", g.L}, {"N", g.N}}; }

Grid grid_from_json(const Json& j) {
  return Grid(j.at("d").get<int>(), j.at("L").get<double>(), j.at("N").get<int>());
}

void write_grid_function(const fs::path& stem, const GridFunction& f, const Json& extra) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  fs::path bin = stem, side = stem;
  bin += ".bin";
  side += ".json";
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  std::ofstream out(bin, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + bin.string());
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  Json j = extra;
  j["grid"] = to_json(f.grid());
  j["components"] = f.components();
  if (!j.contains("time")) j["time"] = nullptr;
  j["dtype"] = "float64";
  j["layout"] = "component-major, row-major";
  write_json(side, j);
}

LoadedGrid read_grid_function(const fs::path& path) {
  fs::path stem = path;
  if (stem.extension() == ".bin" || stem.extension() == ".json") stem.replace_extension();
  fs::path bin = stem, side = stem;
  bin += ".bin";
  side += ".json";
  LoadedGrid lg;
  lg.sidecar = read_json(side);
  Grid g = grid_from_json(lg.sidecar.at("grid"));
  int comps = lg.sidecar.value("components", 1);
  std::vector<double> v(g.size() * static_cast<std::size_t>(comps));
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + bin.string());
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
    throw std::runtime_error("short read in " + bin.string());
  lg.field = GridFunction(g, comps, std::move(v));
  return lg;
}

void write_time_kernel(const fs::path& stem, const TimeKernel& b, const Json& extra) {
  std::vector<double> all;
  for (const auto& s : b.slabs) all.insert(all.end(), s.values().begin(), s.values().end());
  Json j = extra;
  j["slabs"] = b.slabs.size();
  j["t0"] = b.t0;
  j["S"] = b.S;
  if (!j.contains("role")) j["role"] = "kernel";
  write_grid_function(stem, GridFunction(b.grid(), b.dim() * static_cast<int>(b.slabs.size()), std::move(all)), j);
}

TimeKernel read_time_kernel(const fs::path& path) {
  LoadedGrid lg = read_grid_function(path);
  const std::size_t n = lg.sidecar.value("slabs", std::size_t{1});
  const int comps = lg.field.components();
  if (n == 0 || comps % static_cast<int>(n) != 0) throw DomainError("kernel sidecar: bad slab count");
  const int d = comps / static_cast<int>(n);
  if (d != lg.field.grid().d) throw DomainError("kernel must have d components per slab");
  TimeKernel b;
  b.t0 = lg.sidecar.value("t0", 0.0);
  b.S = lg.sidecar.value("S", 1.0);
  const std::size_t block = lg.field.points() * static_cast<std::size_t>(d);
  const auto& v = lg.field.values();
  for (std::size_t k = 0; k < n; ++k)
    b.slabs.emplace_back(lg.field.grid(), d, std::vector<double>(v.begin() + k * block, v.begin() + (k + 1) * block));
  return b;
}

Json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return Json::parse(in);
}

void write_json(const fs::path& p, const Json& j) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << "\n";
}

void write_csv(const fs::path& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("write_csv: header/column mismatch");
  for (const auto& c : columns)
    if (c.size() != columns[0].size()) throw std::invalid_argument("write_csv: columns differ in length");
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << "\n";
  std::size_t rows = columns.empty() ? 0 : columns[0].size();
  out << std::setprecision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c].at(r);
    out << "\n";
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace besov_mkv
