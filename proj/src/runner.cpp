#include "thermoforge/runner.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <random>
#include <sstream>

#include "json.hpp"
#include "thermoforge/fluctuation.hpp"
#include "thermoforge/markov.hpp"
#include "thermoforge/measures.hpp"
#include "thermoforge/numeric.hpp"
#include "thermoforge/pressure.hpp"

namespace thermoforge {
namespace {

constexpr double kJarzynskiTolerance = 1e-12;
constexpr double kRenyiTolerance = 1e-10;
constexpr double kDetailedTolerance = 1e-12;
constexpr double kTraceTolerance = 1e-9;
constexpr double kLevel2Tolerance = 1e-10;
constexpr double kInvolutionTolerance = 1e-12;
constexpr double kFrTolerance = 1e-6;
constexpr double kFaultSize = 1e-3;

// ---------------------------------------------------------------- config

[[noreturn]] void field_error(const ConfigFile& c, const ConfigEntry& e, const std::string& field,
                              const std::string& message) {
  throw InputError(fmt::format("{}:{}: field '{}': {}", c.origin, e.line, field, message));
}

std::string trim_copy(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const ConfigFile& c, const ConfigEntry& e, const std::string& field, const std::string& token) {
  T value{};
  const std::string t = trim_copy(token);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    field_error(c, e, field, fmt::format("'{}' is not a valid number", t));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) field_error(c, e, field, "value must be finite");
  }
  return value;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : value) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

std::vector<double> parse_grid(const ConfigFile& c, const ConfigEntry& e, const std::string& field) {
  const std::string v = e.value;
  if (v.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream in(v);
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(part);
    if (parts.size() != 3) field_error(c, e, field, "expected lo:hi:step");
    const double lo = parse_number<double>(c, e, field, parts[0]);
    const double hi = parse_number<double>(c, e, field, parts[1]);
    const double step = parse_number<double>(c, e, field, parts[2]);
    if (!(step > 0.0) || hi < lo) field_error(c, e, field, "need hi >= lo and step > 0");
    if ((hi - lo) / step > 1e6) field_error(c, e, field, "grid has more than 10^6 points");
    return uniform_grid(lo, hi, step);
  }
  std::vector<double> grid;
  for (const auto& token : split_list(v)) grid.push_back(parse_number<double>(c, e, field, token));
  if (grid.empty()) field_error(c, e, field, "empty grid");
  std::sort(grid.begin(), grid.end());
  return grid;
}

// ---------------------------------------------------------------- outputs

class OutputSink {
 public:
  explicit OutputSink(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw InputError(fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));
  }

  void write(const std::string& name, const std::string& contents) {
    write_text_file(dir_ / name, contents);
    checksums_[name] = sha256_hex(contents);
    names_.push_back(name);
  }

  void finish(nlohmann::json manifest) {
    manifest["files"] = checksums_;
    write_text_file(dir_ / "manifest.json", manifest.dump(2) + "\n");
    names_.push_back("manifest.json");
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::string> checksums_;
  std::vector<std::string> names_;
};

nlohmann::json versions() {
  return {{"thermoforge", kVersion},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"fmt", FMT_VERSION},
          {"csv_schema", std::string(CsvTable::kHeader.substr(2))}};
}

void record(std::vector<CheckResult>& checks, const std::string& fixture, const std::string& name, double worst,
            double tolerance) {
  const bool ok = std::isfinite(worst) && worst <= tolerance;
  checks.push_back({fixture, name, worst, tolerance, ok});
}

std::vector<double> symmetric_renyi_grid() { return uniform_grid(-1.0, 2.0, 0.125); }

struct LoadedSystem {
  std::string name;
  ShiftSpace space;
  Potential potential;
  std::optional<Reversal> reversal;

  const Reversal& require_reversal(const std::string& scenario) const {
    if (!reversal) throw InputError(fmt::format("scenario '{}' needs a reversal in [system]", scenario));
    return *reversal;
  }
};

LoadedSystem load_system(const ExperimentConfig& c) {
  ShiftSpace s = load_shift_space(c.system);
  Potential g = load_potential(c.potential, s);
  std::optional<Reversal> theta = c.reversal;
  if (c.reversal_file) theta = load_reversal(*c.reversal_file);
  return {c.system.stem().string(), std::move(s), std::move(g), std::move(theta)};
}

// Fault injection: G o theta plus 1e-3 on every orbit that starts with symbol 0.
Potential faulty_reversed(const Potential& reversed, int horizon) {
  return Potential::explicit_sequence(horizon, [reversed](int n, std::span<const Symbol> period) {
    return evaluate(reversed, n, period) + (period[0] == 0 ? kFaultSize : 0.0);
  });
}

// ---------------------------------------------------------------- identity suite

void fluctuation_identities(const LoadedSystem& sys, int n_max, std::uint64_t cap, bool fault,
                            std::vector<CheckResult>& checks, CsvTable* table) {
  const Reversal& theta = sys.require_reversal("fluctuation");
  check_compatible(sys.space, theta);
  Potential reversed = pullback(sys.space, sys.potential, theta);
  if (fault) reversed = faulty_reversed(reversed, n_max);
  const auto grid = symmetric_renyi_grid();
  double worst_j = 0.0;
  double worst_r = 0.0;
  double worst_d = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const AtomicLaw law = sigma_law(sys.space, sys.potential, reversed, n, cap);
    const double j = std::abs(jarzynski(law) - 1.0);
    double r = 0.0;
    for (double a : grid) r = std::max(r, std::abs(renyi(law, a) - renyi(law, 1.0 - a)));
    const double d = detailed_symmetry_defect(law);
    worst_j = std::max(worst_j, j);
    worst_r = std::max(worst_r, r);
    worst_d = std::max(worst_d, d);
    if (table) {
      table->add_row({static_cast<long long>(n), j, r, chernoff_exponent(law, n), stein_exponent(law, n)});
    }
  }
  record(checks, sys.name, "jarzynski", worst_j, kJarzynskiTolerance);
  record(checks, sys.name, "renyi_symmetry", worst_r, kRenyiTolerance);
  record(checks, sys.name, "detailed_symmetry", worst_d, kDetailedTolerance);
}

void trace_identity(const LoadedSystem& sys, int n_max, std::uint64_t cap, std::vector<CheckResult>& checks,
                    CsvTable* table) {
  if (!sys.potential.as_additive()) return;
  const TransferMatrix t = transfer_matrix(sys.space, sys.potential);
  double worst = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    const double orbit = log_partition(sys.space, sys.potential, n, cap);
    const double trace = log_trace_power(t.matrix, n);
    const double rel = std::abs(orbit - trace) / std::max(1.0, std::abs(trace));
    worst = std::max(worst, rel);
    if (table) table->add_row({static_cast<long long>(n), orbit, trace, rel});
  }
  record(checks, sys.name, "trace_identity", worst, kTraceTolerance);
}

void reversal_involution(const LoadedSystem& sys, int n, std::uint64_t cap, std::vector<CheckResult>& checks) {
  const Reversal& theta = sys.require_reversal("verify");
  double mismatches = 0.0;
  for (const auto& w : periodic_points(sys.space, n, cap == 0 ? default_enumeration_cap() : cap)) {
    const PeriodicWord image = apply_reversal(sys.space, theta, w);
    if (!is_cyclic_admissible(sys.space, image.letters) || apply_reversal(sys.space, theta, image) != w) {
      mismatches += 1.0;
    }
  }
  record(checks, sys.name, "reversal_involution", mismatches, 0.0);
}

void level2_suite(const LoadedSystem& sys, int chains, std::uint64_t seed, std::vector<CheckResult>& checks,
                  CsvTable* table) {
  const Reversal& theta = sys.require_reversal("level2");
  check_compatible(sys.space, theta);
  if (!sys.potential.as_additive()) throw ContractError("level2: locally constant potential required");
  const double p = spectral_pressure(sys.space, sys.potential);
  std::mt19937_64 rng(seed);
  double worst_fr = 0.0;
  double worst_inv = 0.0;
  double worst_h = 0.0;
  double worst_var = 0.0;
  for (int i = 0; i < chains; ++i) {
    const int order = 1 + i % 3;
    const MarkovMeasure q = random_markov(sys.space, order, rng);
    const MarkovMeasure q_hat = reverse_markov(q, theta);
    const MarkovMeasure back = reverse_markov(q_hat, theta);
    const double rate = rate_level2(q, sys.potential, p);
    const double rate_hat = rate_level2(q_hat, sys.potential, p);
    const double ep = mean_entropy_production(q, sys.potential, theta);
    const double fr = std::abs(rate_hat - rate - ep);
    const double inv = std::max((back.transition() - q.transition()).cwiseAbs().maxCoeff(),
                                (back.stationary() - q.stationary()).cwiseAbs().maxCoeff());
    const double h = std::abs(entropy_rate(q_hat) - entropy_rate(q));
    const double excess = entropy_rate(q) + mean_potential(q, sys.potential) - p;
    worst_fr = std::max(worst_fr, fr);
    worst_inv = std::max(worst_inv, inv);
    worst_h = std::max(worst_h, h);
    worst_var = std::max(worst_var, excess);
    if (table) {
      table->add_row({static_cast<long long>(i), static_cast<long long>(order), rate, rate_hat, ep, fr, inv, h,
                      -excess});
    }
  }
  const MarkovMeasure eq = equilibrium_markov(sys.space, sys.potential);
  const double gap = std::abs(p - entropy_rate(eq) - mean_potential(eq, sys.potential));
  record(checks, sys.name, "level2_fr", worst_fr, kLevel2Tolerance);
  record(checks, sys.name, "reverse_markov_involution", worst_inv, kInvolutionTolerance);
  record(checks, sys.name, "reverse_markov_entropy", worst_h, kInvolutionTolerance);
  record(checks, sys.name, "variational_upper", std::max(0.0, worst_var), kLevel2Tolerance);
  record(checks, sys.name, "variational_equilibrium_gap", gap, kLevel2Tolerance);
}

// ---------------------------------------------------------------- scenarios

struct Context {
  const ExperimentConfig& config;
  const LoadedSystem& sys;
  OutputSink& out;
  std::vector<CheckResult>& checks;
};

std::vector<double> alpha_grid_of(const ExperimentConfig& c) {
  return c.alpha_grid.empty() ? default_alpha_grid() : c.alpha_grid;
}

EntropicPressureOptions entropic_options(const ExperimentConfig& c) {
  EntropicPressureOptions o;
  o.n_max = c.n_max;
  o.cap = c.cap;
  o.threads = c.threads;
  return o;
}

RateFunction rate_of(const ExperimentConfig& c, const EntropicPressure& e) {
  return c.s_grid.empty() ? legendre(e.grid()) : legendre(e.grid(), c.s_grid);
}

void scenario_pressure(Context& ctx) {
  const auto& c = ctx.config;
  const auto& sys = ctx.sys;
  PeriodicPressureOptions options;
  options.cap = c.cap;
  options.richardson = true;
  const PressureEstimate periodic = pressure_periodic(sys.space, sys.potential, c.n_max, options);
  CsvTable per_n({"n", "p_n"});
  for (const auto& point : periodic.per_n) per_n.add_row({static_cast<long long>(point.n), point.value});
  ctx.out.write("pressure_periodic.csv", per_n.render());

  CsvTable summary({"method", "value", "note"});
  summary.add_row({std::string("periodic"), periodic.extrapolated,
                   std::string(periodic.monotone ? "monotone" : (periodic.oscillating ? "oscillating" : "mixed"))});
  summary.add_row({std::string("periodic_richardson"), *periodic.richardson, std::string("log Z_n - log Z_{n-1}")});
  if (sys.potential.as_additive() && sys.space.is_primitive()) {
    summary.add_row({std::string("spectral"), spectral_pressure(sys.space, sys.potential), std::string("perron")});
  }
  const PressureBounds b = pressure_bounds_spanning_separated(sys.space, sys.potential, c.n_max, c.k, c.cap);
  summary.add_row({std::string("spanning_lower"), b.lower, std::string(b.certified ? "certified" : "heuristic")});
  summary.add_row({std::string("separated_upper"), b.upper, std::string(b.certified ? "certified" : "heuristic")});
  ctx.out.write("pressure_summary.csv", summary.render());

  CsvTable bounds({"n", "k", "spanning", "separated", "lower", "upper", "certified"});
  bounds.add_row({static_cast<long long>(b.n), static_cast<long long>(b.k), b.spanning, b.separated, b.lower, b.upper,
                  static_cast<long long>(b.certified)});
  ctx.out.write("pressure_bounds.csv", bounds.render());

  if (sys.potential.as_additive()) {
    CsvTable trace({"n", "log_partition", "log_trace", "rel_err"});
    trace_identity(sys, c.n_max, c.cap, ctx.checks, &trace);
    ctx.out.write("trace_identity.csv", trace.render());
  }
}

void scenario_fluctuation(Context& ctx) {
  const auto& c = ctx.config;
  const auto& sys = ctx.sys;
  const Reversal& theta = sys.require_reversal("fluctuation");
  check_compatible(sys.space, theta);

  CsvTable identities({"n", "jarzynski_err", "renyi_sym_err", "chernoff", "stein"});
  fluctuation_identities(sys, c.n_max, c.cap, false, ctx.checks, &identities);
  ctx.out.write("fluctuation_identities.csv", identities.render());

  const AtomicLaw law = sigma_law(sys.space, sys.potential, theta, c.n_max, c.cap);
  CsvTable law_table({"s", "weight"});
  for (const auto& a : law.atoms()) law_table.add_row({a.value, a.weight});
  ctx.out.write("sigma_law.csv", law_table.render());

  const EntropicPressure e = entropic_pressure(sys.space, sys.potential, theta, alpha_grid_of(c), entropic_options(c));
  CsvTable e_table({"alpha", "e_alpha"});
  CsvTable raw({"alpha", "tilted_pressure", "base_pressure"});
  for (std::size_t i = 0; i < e.alpha.size(); ++i) {
    e_table.add_row({e.alpha[i], e.e[i]});
    raw.add_row({e.alpha[i], e.tilted[i], e.base});
  }
  ctx.out.write("entropic_pressure.csv", e_table.render());
  ctx.out.write("entropic_pressure_raw.csv", raw.render());

  const RateFunction rate = rate_of(c, e);
  CsvTable rate_table({"s", "I_s", "flag_boundary"});
  for (std::size_t i = 0; i < rate.grid.size(); ++i) {
    rate_table.add_row({rate.grid[i], rate.values[i], static_cast<long long>(rate.boundary[i])});
  }
  ctx.out.write("rate_function.csv", rate_table.render());

  CsvTable fr({"s", "residual"});
  double worst = 0.0;
  for (std::size_t i = 0; i < rate.grid.size(); ++i) {
    const double s = rate.grid[i];
    auto mirror = std::find(rate.grid.begin(), rate.grid.end(), -s);
    if (mirror == rate.grid.end()) continue;
    const auto j = static_cast<std::size_t>(mirror - rate.grid.begin());
    if (rate.boundary[i] || rate.boundary[j]) continue;
    const double residual = rate.values[j] - rate.values[i] - s;
    fr.add_row({s, residual});
    worst = std::max(worst, std::abs(residual));
  }
  ctx.out.write("fr_residuals.csv", fr.render());
  record(ctx.checks, sys.name, "rate_fr", worst, kFrTolerance);
  const std::string problem = rate_function_problem(rate);
  record(ctx.checks, sys.name, "rate_convex_min0", problem.empty() ? 0.0 : 1.0, 0.0);
}

void scenario_ldp(Context& ctx) {
  const auto& c = ctx.config;
  const auto& sys = ctx.sys;
  const Reversal& theta = sys.require_reversal("ldp");
  check_compatible(sys.space, theta);
  const EntropicPressure e = entropic_pressure(sys.space, sys.potential, theta, alpha_grid_of(c), entropic_options(c));
  const RateFunction rate = rate_of(c, e);
  const double s_bar = -entropic_pressure_derivative(sys.space, sys.potential, theta, 0.0, kDerivativeStep,
                                                     entropic_options(c));
  const std::vector<double> centers{-s_bar, -0.5 * s_bar, 0.0, 0.5 * s_bar, s_bar};
  CsvTable table({"n", "s", "delta", "log_prob_rate", "minus_inf_rate", "abs_error"});
  for (int n = 2; n <= c.n_max; ++n) {
    const AtomicLaw law = sigma_law(sys.space, sys.potential, theta, n, c.cap);
    for (double s : centers) {
      const double lhs = ft_empirical_check(law, n, s - c.delta, s + c.delta);
      const auto inf = rate.infimum(s - c.delta, s + c.delta);
      const double rhs = inf ? -*inf : kNegInf;
      table.add_row({static_cast<long long>(n), s, c.delta, lhs, rhs,
                     std::isfinite(lhs) && std::isfinite(rhs) ? std::abs(lhs - rhs)
                                                              : std::numeric_limits<double>::infinity()});
    }
  }
  ctx.out.write("ldp_check.csv", table.render());

  // Level-2: law of the k-block empirical measure at n_max.
  const int n = c.n_max;
  const PofpMeasure p = pofp_measure(sys.space, sys.potential, n, c.cap);
  const EmpiricalLaw law = pushforward_empirical(p, c.k);
  const std::vector<Word> blocks = admissible_words(sys.space, c.k);
  std::vector<std::string> columns{"atom", "weight"};
  for (const Word& b : blocks) {
    std::string name = "mu_";
    for (Symbol a : b) name += std::to_string(a) + (sys.space.alphabet_size() > 10 ? "_" : "");
    columns.push_back(name);
  }
  CsvTable atoms(columns);
  for (std::size_t i = 0; i < law.atoms.size(); ++i) {
    std::vector<CsvCell> row{static_cast<long long>(i), law.atoms[i].second};
    for (const Word& b : blocks) row.emplace_back(law.atoms[i].first.frequency(b));
    atoms.add_row(std::move(row));
  }
  ctx.out.write("empirical_law.csv", atoms.render());

  if (sys.potential.as_additive() && sys.space.is_primitive()) {
    // Probability that the k-block empirical measure is delta-far (sup norm)
    // from the equilibrium k-marginals, as a rate.
    const MarkovMeasure eq = equilibrium_markov(sys.space, sys.potential);
    std::map<Word, double> target;
    for (const Word& b : blocks) target[b] = std::exp(eq.cylinder_log_probability(b));
    CsvTable conc({"n", "k", "delta", "log_prob_rate_far"});
    for (int m = std::max(2, c.k); m <= c.n_max; ++m) {
      const EmpiricalLaw lm = pushforward_empirical(pofp_measure(sys.space, sys.potential, m, c.cap), c.k);
      const double rate_far = lm.log_rate([&](const BlockEmpirical& mu) {
        double d = 0.0;
        for (const auto& [b, f] : target) d = std::max(d, std::abs(mu.frequency(b) - f));
        return d > c.delta;
      });
      conc.add_row({static_cast<long long>(m), static_cast<long long>(c.k), c.delta, rate_far});
    }
    ctx.out.write("level2_concentration.csv", conc.render());
  }
}

void scenario_exponents(Context& ctx) {
  const auto& c = ctx.config;
  const auto& sys = ctx.sys;
  const Reversal& theta = sys.require_reversal("exponents");
  check_compatible(sys.space, theta);
  const auto options = entropic_options(c);
  const double e_half = entropic_pressure(sys.space, sys.potential, theta, {0.5}, options).e[0];
  const double s_bar = -entropic_pressure_derivative(sys.space, sys.potential, theta, 0.0, kDerivativeStep, options);
  CsvTable table({"n", "chernoff", "stein", "e_half", "minus_e_prime_0"});
  for (int n = 1; n <= c.n_max; ++n) {
    const AtomicLaw law = sigma_law(sys.space, sys.potential, theta, n, c.cap);
    table.add_row({static_cast<long long>(n), chernoff_exponent(law, n), stein_exponent(law, n), e_half, s_bar});
  }
  ctx.out.write("exponents.csv", table.render());

  const EntropicPressure eh = entropic_pressure(sys.space, sys.potential, theta, hoeffding_alpha_grid(), options);
  const double top = s_bar > 0.0 ? 1.2 * s_bar : 1.0;
  std::vector<double> r_grid = uniform_grid(0.0, top, top / 40.0);
  r_grid.push_back(-e_half);
  std::sort(r_grid.begin(), r_grid.end());
  r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());
  const GridFunction f = hoeffding_curve(eh.grid(), r_grid);
  CsvTable hoeffding({"r", "f_r"});
  for (std::size_t i = 0; i < f.x.size(); ++i) hoeffding.add_row({f.x[i], f.y[i]});
  ctx.out.write("hoeffding.csv", hoeffding.render());
}

void scenario_level2(Context& ctx) {
  CsvTable table({"chain", "order", "rate", "rate_reversed", "ep", "fr_residual", "involution_err", "entropy_err",
                  "variational_gap"});
  level2_suite(ctx.sys, ctx.config.chains, ctx.config.seed, ctx.checks, &table);
  ctx.out.write("level2_fr.csv", table.render());
}

void scenario_aa(Context& ctx) {
  const auto& c = ctx.config;
  const auto& sys = ctx.sys;
  CsvTable defect({"k", "n", "aa_defect"});
  for (int k : {1, 2, 4, 8}) {
    if (k > c.n_max) break;
    defect.add_row({static_cast<long long>(k), static_cast<long long>(c.n_max),
                    aa_defect(sys.space, sys.potential, k, c.n_max, c.cap)});
  }
  ctx.out.write("aa_defect.csv", defect.render());

  CsvTable var({"n", "k", "variation"});
  CylinderOptions cyl;
  cyl.cap = c.cap;
  for (int n = 1; n <= std::min(c.n_max, 10); ++n) {
    var.add_row({static_cast<long long>(n), static_cast<long long>(c.k), variation(sys.space, sys.potential, n, c.k, cyl)});
  }
  ctx.out.write("variation.csv", var.render());

  CsvTable semi({"n", "seminorm"});
  for (int n = 1; n <= c.n_max; ++n) {
    semi.add_row({static_cast<long long>(n), seminorm_estimate(sys.space, sys.potential, n, c.cap)});
  }
  ctx.out.write("seminorm.csv", semi.render());

  if (sys.potential.as_matrix_product() && sys.space.is_primitive()) {
    const double periodic = pressure_periodic(sys.space, sys.potential, c.n_max, {c.cap, false}).extrapolated;
    CsvTable block({"k", "block_pressure", "periodic_pressure"});
    for (int k : {1, 2, 4, 8}) {
      if (k > c.n_max) break;
      block.add_row({static_cast<long long>(k),
                     spectral_pressure(sys.space, block_average(sys.space, sys.potential, k, c.cap)), periodic});
    }
    ctx.out.write("block_average.csv", block.render());
  }
}

nlohmann::json settings_of(const ExperimentConfig& c) {
  const auto grid = alpha_grid_of(c);
  return {{"n_max", c.n_max},
          {"k", c.k},
          {"alpha_grid", {{"first", grid.front()}, {"last", grid.back()}, {"points", grid.size()}}},
          {"s_grid_points", c.s_grid.size()},
          {"delta", c.delta},
          {"chains", c.chains},
          {"threads", c.threads},
          {"cap", c.cap == 0 ? default_enumeration_cap() : c.cap},
          {"tolerances",
           {{"jarzynski", kJarzynskiTolerance},
            {"renyi", kRenyiTolerance},
            {"detailed_symmetry", kDetailedTolerance},
            {"trace", kTraceTolerance},
            {"level2", kLevel2Tolerance},
            {"fr", kFrTolerance}}}};
}

CsvTable checks_table(const std::vector<CheckResult>& checks) {
  CsvTable t({"fixture", "check", "worst", "tolerance", "status"});
  for (const auto& r : checks) {
    t.add_row({r.fixture, r.check, r.worst, r.tolerance, std::string(r.passed ? "pass" : "FAIL")});
  }
  return t;
}

void throw_on_failure(const std::vector<CheckResult>& checks) {
  for (const auto& r : checks) {
    if (!r.passed) {
      throw IdentityViolation(fmt::format("identity '{}' failed on {}: worst {:.3e} > tolerance {:.1e}", r.check,
                                          r.fixture, r.worst, r.tolerance));
    }
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& origin,
                                         const std::filesystem::path& base_dir) {
  const ConfigFile file = parse_config(text, origin);
  ExperimentConfig c;
  c.origin = origin;
  c.source = std::string(text);
  static const std::map<std::string, std::vector<std::string>> known{
      {"system", {"shift", "potential", "reversal"}},
      {"run", {"scenarios", "scenario", "n_max", "k", "alpha_grid", "s_grid", "delta", "chains", "seed", "output_dir",
               "threads", "cap"}}};
  for (const auto& [section, entries] : file.sections) {
    auto it = known.find(section);
    if (it == known.end()) {
      throw InputError(fmt::format("{}: unknown section [{}]", origin, section));
    }
    for (const auto& [key, entry] : entries) {
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
        field_error(file, entry, key, fmt::format("unknown field in [{}]", section));
      }
    }
  }
  auto required = [&](const std::string& key) -> const ConfigEntry& {
    const ConfigEntry* e = file.find("system", key);
    if (!e) throw InputError(fmt::format("{}: missing field '{}' in [system]", origin, key));
    if (e->value.empty()) field_error(file, *e, key, "empty value");
    return *e;
  };
  c.system = base_dir / required("shift").value;
  c.potential = base_dir / required("potential").value;
  if (const ConfigEntry* e = file.find("system", "reversal")) {
    if (e->value.find_first_of(" \t") != std::string::npos) {
      try {
        c.reversal = parse_reversal_inline(e->value, origin);
      } catch (const InputError& err) {
        field_error(file, *e, "reversal", err.what());
      }
    } else {
      c.reversal_file = base_dir / e->value;
    }
  }
  const ConfigEntry* scen = file.find("run", "scenarios");
  if (!scen) scen = file.find("run", "scenario");
  if (scen) {
    c.scenarios_given = true;
    for (const auto& name : split_list(scen->value)) {
      const auto& names = scenario_names();
      if (std::find(names.begin(), names.end(), name) == names.end()) {
        field_error(file, *scen, "scenarios", fmt::format("unknown scenario '{}'", name));
      }
      c.scenarios.push_back(name);
    }
  }
  if (const ConfigEntry* e = file.find("run", "n_max")) {
    c.n_max = parse_number<int>(file, *e, "n_max", e->value);
    if (c.n_max < 1 || c.n_max > 64) field_error(file, *e, "n_max", "must be in 1..64");
  }
  if (const ConfigEntry* e = file.find("run", "k")) {
    c.k = parse_number<int>(file, *e, "k", e->value);
    if (c.k < 1 || c.k > 16) field_error(file, *e, "k", "must be in 1..16");
  }
  if (const ConfigEntry* e = file.find("run", "alpha_grid")) c.alpha_grid = parse_grid(file, *e, "alpha_grid");
  if (const ConfigEntry* e = file.find("run", "s_grid")) c.s_grid = parse_grid(file, *e, "s_grid");
  if (const ConfigEntry* e = file.find("run", "delta")) {
    c.delta = parse_number<double>(file, *e, "delta", e->value);
    if (!(c.delta > 0.0)) field_error(file, *e, "delta", "must be positive");
  }
  if (const ConfigEntry* e = file.find("run", "chains")) {
    c.chains = parse_number<int>(file, *e, "chains", e->value);
    if (c.chains < 1) field_error(file, *e, "chains", "must be >= 1");
  }
  if (const ConfigEntry* e = file.find("run", "seed")) c.seed = parse_number<std::uint64_t>(file, *e, "seed", e->value);
  if (const ConfigEntry* e = file.find("run", "output_dir")) c.output_dir = base_dir / e->value;
  if (const ConfigEntry* e = file.find("run", "threads")) {
    c.threads = parse_number<int>(file, *e, "threads", e->value);
    if (c.threads < 1) field_error(file, *e, "threads", "must be >= 1");
  }
  if (const ConfigEntry* e = file.find("run", "cap")) {
    c.cap = parse_number<std::uint64_t>(file, *e, "cap", e->value);
    if (c.cap == 0) field_error(file, *e, "cap", "must be positive");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text_file(path), path.string(), path.parent_path());
}

RunReport run_experiment(const ExperimentConfig& config) {
  if (config.scenarios.empty()) {
    throw InputError(fmt::format("{}: field 'scenarios': empty scenario list", config.origin));
  }
  const LoadedSystem sys = load_system(config);
  OutputSink out(config.output_dir);
  RunReport report;
  Context ctx{config, sys, out, report.checks};
  for (const auto& name : config.scenarios) {
    if (name == "pressure") {
      scenario_pressure(ctx);
    } else if (name == "fluctuation") {
      scenario_fluctuation(ctx);
    } else if (name == "ldp") {
      scenario_ldp(ctx);
    } else if (name == "exponents") {
      scenario_exponents(ctx);
    } else if (name == "level2") {
      scenario_level2(ctx);
    } else if (name == "aa-diagnostics") {
      scenario_aa(ctx);
    }
  }
  if (!report.checks.empty()) out.write("checks.csv", checks_table(report.checks).render());
  out.finish({{"config_sha256", sha256_hex(config.source)},
              {"versions", versions()},
              {"scenarios", config.scenarios},
              {"seed", config.seed},
              {"settings", settings_of(config)}});
  report.files = out.names();
  throw_on_failure(report.checks);
  return report;
}

RunReport run_verify(const VerifyOptions& options) {
  std::vector<LoadedSystem> systems;
  std::string description;
  int n_max = options.n_max;
  int chains = options.chains;
  std::uint64_t seed = options.seed;
  std::uint64_t cap = options.cap;
  if (options.config) {
    const ExperimentConfig& c = *options.config;
    if (c.scenarios.empty()) {
      throw InputError(fmt::format("{}: field 'scenarios': empty scenario list", c.origin));
    }
    systems.push_back(load_system(c));
    n_max = c.n_max;
    if (cap == 0) cap = c.cap;
    description = c.source;
  } else {
    for (auto& f : identity_fixtures()) systems.push_back({f.name, f.space, f.potential, f.reversal});
    const Fixture b = bernoulli_fixture();
    systems.push_back({b.name, b.space, b.potential, b.reversal});
    const Fixture m = matrix_product_fixture();
    systems.push_back({m.name, m.space, m.potential, m.reversal});
    description = "bundled fixtures";
  }
  description += fmt::format("\nn_max={} chains={} seed={} fault={}", n_max, chains, seed, options.inject_fault);

  RunReport report;
  for (const auto& sys : systems) {
    if (sys.reversal) {
      check_compatible(sys.space, *sys.reversal);
      fluctuation_identities(sys, n_max, cap, options.inject_fault, report.checks, nullptr);
      reversal_involution(sys, std::min(n_max, 12), cap, report.checks);
    }
    trace_identity(sys, n_max, cap, report.checks, nullptr);
    if (sys.reversal && sys.potential.as_additive() && sys.space.is_primitive()) {
      level2_suite(sys, chains, seed, report.checks, nullptr);
    }
  }
  OutputSink out(options.output_dir);
  out.write("verify.csv", checks_table(report.checks).render());
  out.finish({{"config_sha256", sha256_hex(description)},
              {"versions", versions()},
              {"seed", seed},
              {"settings", {{"n_max", n_max}, {"chains", chains}, {"inject_fault", options.inject_fault}}}});
  report.files = out.names();
  return report;
}

std::string format_checks(const std::vector<CheckResult>& checks) {
  std::size_t fw = 7;
  std::size_t cw = 5;
  for (const auto& r : checks) {
    fw = std::max(fw, r.fixture.size());
    cw = std::max(cw, r.check.size());
  }
  std::string out = fmt::format("{:<{}}  {:<{}}  {:>10}  {:>9}  {}\n", "fixture", fw, "check", cw, "worst", "tolerance",
                                "status");
  for (const auto& r : checks) {
    out += fmt::format("{:<{}}  {:<{}}  {:>10.3e}  {:>9.1e}  {}\n", r.fixture, fw, r.check, cw, r.worst,
                       r.tolerance, r.passed ? "pass" : "FAIL");
  }
  return out;
}

}  // namespace thermoforge
