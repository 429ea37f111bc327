#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thermoforge/errors.hpp"
#include "thermoforge/fixtures.hpp"
#include "thermoforge/io.hpp"

namespace thermoforge {

inline constexpr const char* kVersion = "1.0.0";

/// An exact identity broke its tolerance.
class IdentityViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"pressure", "fluctuation", "ldp",
                                              "exponents", "level2", "aa-diagnostics"};
  return names;
}

struct ExperimentConfig {
  std::string origin;
  std::string source;  // raw text, hashed into the manifest
  std::filesystem::path system;
  std::filesystem::path potential;
  std::optional<std::filesystem::path> reversal_file;
  std::optional<Reversal> reversal;
  std::vector<std::string> scenarios;
  bool scenarios_given = false;
  int n_max = 12;
  int k = 2;
  std::vector<double> alpha_grid;
  std::vector<double> s_grid;  // empty: default Legendre grid
  double delta = 0.05;
  int chains = 500;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  int threads = 1;
  std::uint64_t cap = 0;
};

/// Sections [system] (shift, potential, reversal) and [run] (scenarios,
/// n_max, k, alpha_grid, s_grid, delta, chains, seed, output_dir, threads,
/// cap). Paths are relative to the config file. Grids read "lo:hi:step" or a
/// comma list.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& origin,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct CheckResult {
  std::string fixture;
  std::string check;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct RunReport {
  std::vector<std::string> files;  // relative to the output directory
  std::vector<CheckResult> checks;
};

/// Runs every scenario of the config and writes CSV/JSON files plus
/// manifest.json. Throws IdentityViolation after writing when an identity
/// failed.
RunReport run_experiment(const ExperimentConfig& config);

struct VerifyOptions {
  std::optional<ExperimentConfig> config;  // empty: bundled fixtures
  std::filesystem::path output_dir = "verify-out";
  std::uint64_t seed = 1;
  int n_max = 12;
  int chains = 50;
  std::uint64_t cap = 0;
  /// Perturbs the reversed potential so that the exact identities must fail.
  bool inject_fault = false;
};

/// Exact-identity suite. Writes verify.csv and manifest.json; the caller
/// decides the exit status from the returned checks.
RunReport run_verify(const VerifyOptions& options);

/// Pass/fail table for the terminal.
std::string format_checks(const std::vector<CheckResult>& checks);

}  // namespace thermoforge
