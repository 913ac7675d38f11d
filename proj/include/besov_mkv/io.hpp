#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "besov_mkv/grid.hpp"
#include "besov_mkv/kernels.hpp"
#include "besov_mkv/params.hpp"

namespace besov_mkv {

using Json = nlohmann::ordered_json;

/// Numbers, with +infinity written as the string "inf".
Json exponent_to_json(double x);
double exponent_from_json(const Json& j);

Json to_json(const ParameterSet& ps);
ParameterSet parameters_from_json(const Json& j);

Json to_json(const KernelSpec& k);
KernelSpec kernel_spec_from_json(const Json& j);

Json to_json(const Grid& g);
Grid grid_from_json(const Json& j);

/// Writes `stem.bin` (little-endian float64, component-major) and the sidecar
/// `stem.json` holding the grid, component count and `extra` fields.
void write_grid_function(const std::filesystem::path& stem, const GridFunction& f, const Json& extra = Json::object());

struct LoadedGrid {
  GridFunction field;
  Json sidecar;
};
/// Accepts either the stem or the .bin path.
LoadedGrid read_grid_function(const std::filesystem::path& path);

/// All slabs in one binary, slab-major; the sidecar adds slabs, t0 and S.
void write_time_kernel(const std::filesystem::path& stem, const TimeKernel& b, const Json& extra = Json::object());
TimeKernel read_time_kernel(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& p);
void write_json(const std::filesystem::path& p, const Json& j);

/// Columns of equal length written with 17 significant digits.
void write_csv(const std::filesystem::path& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

/// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& p);

}  // namespace besov_mkv
