// Command-line runner: `thermoforge run` executes the scenarios of a config,
// `thermoforge verify` runs the exact-identity suite.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <iostream>

#include "thermoforge/runner.hpp"

namespace tf = thermoforge;

namespace {

enum Exit { kOk = 0, kConfig = 1, kResource = 2, kNumerical = 3 };

struct Flags {
  std::string config;
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::uint64_t> cap;
  std::optional<int> n_max;
  bool inject_fault = false;
};

void add_common(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "experiment config file");
  cmd.add_option("--scenario", f.scenario, "scenario name(s), comma separated; overrides the config");
  cmd.add_option("--out", f.out, "output directory");
  cmd.add_option("--seed", f.seed, "seed for randomized suites");
  cmd.add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd.add_option("--cap", f.cap, "enumeration cap on l^n")->check(CLI::PositiveNumber);
}

tf::ExperimentConfig apply(const Flags& f, tf::ExperimentConfig c) {
  if (!f.scenario.empty()) {
    c.scenarios.clear();
    std::string name;
    for (char ch : f.scenario + ",") {
      if (ch == ',') {
        if (!name.empty()) {
          const auto& names = tf::scenario_names();
          if (std::find(names.begin(), names.end(), name) == names.end()) {
            throw tf::InputError(fmt::format("--scenario: unknown scenario '{}'", name));
          }
          c.scenarios.push_back(name);
        }
        name.clear();
      } else {
        name += ch;
      }
    }
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  if (f.cap) c.cap = *f.cap;
  if (f.n_max) c.n_max = *f.n_max;
  return c;
}

int report(const std::vector<tf::CheckResult>& checks) {
  if (!checks.empty()) std::cout << tf::format_checks(checks);
  for (const auto& c : checks) {
    if (!c.passed) {
      std::cerr << fmt::format("error: identity '{}' failed on {} ({:.3e} > {:.1e})\n", c.check, c.fixture, c.worst,
                               c.tolerance);
      return kNumerical;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermoforge: pressure, fluctuation relations and large deviations on subshifts of finite type"};
  app.require_subcommand(1);
  Flags run_flags;
  Flags verify_flags;
  CLI::App* run = app.add_subcommand("run", "execute the scenarios of a config");
  add_common(*run, run_flags);
  run->add_option("--n-max", run_flags.n_max, "largest period")->check(CLI::PositiveNumber);
  CLI::App* verify = app.add_subcommand("verify", "exact-identity suite (bundled fixtures unless --config)");
  add_common(*verify, verify_flags);
  verify->add_option("--n-max", verify_flags.n_max, "largest period")->check(CLI::PositiveNumber);
  verify->add_flag("--inject-fault", verify_flags.inject_fault,
                   "perturb the reversed potential by 1e-3 on part of the orbits (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (run->parsed()) {
      if (run_flags.config.empty()) throw tf::InputError("run: --config is required");
      const tf::ExperimentConfig config = apply(run_flags, tf::load_experiment_config(run_flags.config));
      const tf::RunReport r = tf::run_experiment(config);
      std::cout << fmt::format("wrote {} files to {}\n", r.files.size(), config.output_dir.string());
      return report(r.checks);
    }
    tf::VerifyOptions options;
    if (!verify_flags.config.empty()) {
      options.config = apply(verify_flags, tf::load_experiment_config(verify_flags.config));
    } else {
      options.n_max = 16;
    }
    if (!verify_flags.out.empty()) options.output_dir = verify_flags.out;
    if (verify_flags.seed) options.seed = *verify_flags.seed;
    if (verify_flags.cap) options.cap = *verify_flags.cap;
    if (verify_flags.n_max) options.n_max = *verify_flags.n_max;
    options.inject_fault = verify_flags.inject_fault;
    const tf::RunReport r = tf::run_verify(options);
    return report(r.checks);
  } catch (const tf::IdentityViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const tf::ResourceError& e) {
    std::cerr << "error: resource cap exceeded: " << e.what() << "\n";
    return kResource;
  } catch (const tf::NumericalError& e) {
    std::cerr << "error: numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const tf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
}
