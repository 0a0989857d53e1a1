#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace hgauge {

/// One measured quantity compared against a bound.
struct Check {
  std::string name;
  std::string identity;  ///< plain description of what is being tested
  double value = 0.0;
  double tolerance = 0.0;
  std::string relation;  ///< "<=" or ">="
  bool passed = false;
};

Check check_at_most(std::string name, std::string identity, double value, double tolerance);
Check check_at_least(std::string name, std::string identity, double value, double bound);

/// Overrides a suite's built-in defaults where set.
struct SuiteOptions {
  std::optional<std::vector<int>> grid;
  std::optional<int> max_mode;
  double cg_tol = 1e-10;
  std::uint64_t seed = 1;
  double stop_tol = 1e-7;
  int steps = 100000;
  double dt = 0.0;
  double kappa = 1.0;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  /// Wall-clock data, kept out of the comparable part of a report.
  std::map<std::string, double> timings;
  bool passed() const;
};

/// adjointness, theorem1, decompositions, york-relation, energy, gauss-bonnet,
/// first-variation, theorem4, hessian, curv2k, flow, determinism
const std::vector<std::string>& suite_names();

/// Throws ContractViolation for an unknown suite.
SuiteResult run_suite(const std::string& name, const SuiteOptions& options);

nlohmann::ordered_json check_json(const Check& c);
nlohmann::ordered_json suites_json(const std::vector<SuiteResult>& results);

/// Report body plus a "metadata" member holding timestamps and timings.
struct Report {
  nlohmann::ordered_json body = nlohmann::ordered_json::object();
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::string dump() const;
  /// The body only, which is what determinism comparisons use.
  std::string comparable() const;
};

std::string utc_timestamp();

}  // namespace hgauge
