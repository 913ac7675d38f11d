#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "besov_mkv/io.hpp"
#include "doctest.h"

using namespace besov_mkv;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("besov-mkv-io-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("exponents and parameter sets") {
  CHECK(exponent_to_json(kInf) == "inf");
  CHECK(exponent_to_json(2.5) == 2.5);
  CHECK(std::isinf(exponent_from_json(Json("inf"))));
  CHECK(exponent_from_json(Json(3)) == 3.0);
  CHECK_THROWS(exponent_from_json(Json("banana")));

  ParameterSet ps;
  ps.alpha = 1.7;
  ps.r = kInf;
  ps.p = 2.0;
  ps.beta = -1.2;
  ps.beta0 = 0.3;
  ps.theta = 0.2;
  auto back = parameters_from_json(to_json(ps));
  CHECK(back.alpha == ps.alpha);
  CHECK(std::isinf(back.r));
  CHECK(back.p == 2.0);
  CHECK(back.beta == ps.beta);
  CHECK(back.beta0 == ps.beta0);
  CHECK(back.theta == ps.theta);
  CHECK(back.eta == ps.eta);
  CHECK(to_json(back) == to_json(ps));

  Json extra = to_json(ps);
  extra["gamma"] = 1.0;
  CHECK_THROWS(parameters_from_json(extra));
  Json bad = to_json(ps);
  bad["alpha"] = 2.5;
  CHECK_THROWS(parameters_from_json(bad));
}

TEST_CASE("kernel spec and grid") {
  KernelSpec k;
  k.family = KernelFamily::fractional_derivative_gaussian;
  k.beta = -0.7;
  k.seed = 123456789012345ULL;
  k.slabs = 3;
  k.amplitude = 0.02;
  k.cutoff = 4.0;
  k.width = 0.3;
  auto back = kernel_spec_from_json(to_json(k));
  CHECK(back.family == k.family);
  CHECK(back.seed == k.seed);
  CHECK(back.slabs == 3);
  CHECK(std::isinf(back.p));
  CHECK(to_json(back) == to_json(k));

  Grid g(2, 4.0, 32);
  CHECK(grid_from_json(to_json(g)) == g);
  CHECK_THROWS(grid_from_json(Json{{"d", 3}, {"L", 4.0}, {"N", 32}}));
}

TEST_CASE("grid functions on disk") {
  TempDir tmp;
  Grid g(1, 5.0, 64);
  auto f = GridFunction::sample(g, [](auto x) { return std::sin(x[0]) + 0.1; });
  write_grid_function(tmp.path / "f", f, Json{{"time", 0.5}});
  CHECK(fs::file_size(tmp.path / "f.bin") == 64 * sizeof(double));
  auto side = read_json(tmp.path / "f.json");
  CHECK(side["components"] == 1);
  CHECK(side["dtype"] == "float64");
  CHECK(side["time"] == 0.5);
  CHECK(grid_from_json(side["grid"]) == g);

  for (auto p : {tmp.path / "f", tmp.path / "f.bin"}) {
    auto loaded = read_grid_function(p);
    CHECK(loaded.field.values() == f.values());
    CHECK(loaded.sidecar["time"] == 0.5);
  }
  CHECK_THROWS(read_grid_function(tmp.path / "missing"));

  SUBCASE("vector field in 2d") {
    Grid g2(2, 3.0, 16);
    GridFunction v(g2, 2);
    for (std::size_t i = 0; i < v.values().size(); ++i) v.values()[i] = 0.25 * i;
    write_grid_function(tmp.path / "v", v);
    auto back = read_grid_function(tmp.path / "v");
    CHECK(back.field.components() == 2);
    CHECK(back.field.values() == v.values());
  }
  SUBCASE("time kernels") {
    KernelSpec k;
    k.slabs = 3;
    auto tk = synthesize_time_kernel(k, g, 0.0, 0.3);
    write_time_kernel(tmp.path / "b", tk);
    auto back = read_time_kernel(tmp.path / "b");
    REQUIRE(back.slabs.size() == 3);
    CHECK(back.t0 == 0.0);
    CHECK(back.S == 0.3);
    for (int s = 0; s < 3; ++s) CHECK(back.slabs[s].values() == tk.slabs[s].values());
  }
}

TEST_CASE("csv and json output") {
  TempDir tmp;
  write_csv(tmp.path / "t.csv", {"s", "x"}, {{0.1, 0.2}, {1.0 / 3.0, -2.0}});
  std::istringstream in(slurp(tmp.path / "t.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,x");
  std::getline(in, line);
  auto comma = line.find(',');
  REQUIRE(comma != std::string::npos);
  CHECK(std::stod(line.substr(comma + 1)) == 1.0 / 3.0);
  std::getline(in, line);
  CHECK(std::stod(line.substr(0, line.find(','))) == 0.2);
  CHECK_THROWS(write_csv(tmp.path / "u.csv", {"a", "b"}, {{1.0}, {1.0, 2.0}}));

  Json j{{"b", 1}, {"a", Json::array({1, 2})}};
  write_json(tmp.path / "j.json", j);
  CHECK(read_json(tmp.path / "j.json") == j);
  CHECK(read_json(tmp.path / "j.json").begin().key() == "b");
  CHECK_THROWS(read_json(tmp.path / "none.json"));
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  TempDir tmp;
  std::ofstream(tmp.path / "abc.txt", std::ios::binary) << "abc";
  CHECK(sha256_file(tmp.path / "abc.txt") == sha256_hex("abc"));
}
