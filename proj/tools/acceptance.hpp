#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "besov_mkv/io.hpp"

namespace besov_mkv::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

/// Suite names in listing order; "all" covers every criterion.
std::vector<std::string> suite_names();
/// Throws std::invalid_argument for an unknown suite.
std::vector<int> suite_members(const std::string& suite);
std::string criterion_name(int id);

/// Runs the suite, printing one line per criterion to `out` as it finishes.
std::vector<CriterionResult> run_suite(const std::string& suite, std::ostream* out = nullptr);

Json to_json(const std::vector<CriterionResult>& results);

}  // namespace besov_mkv::acceptance
