#include "thermoforge/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <iterator>
#include <limits>

#include "thermoforge/errors.hpp"
#include "thermoforge/markov.hpp"
#include "thermoforge/measures.hpp"
#include "thermoforge/numeric.hpp"

namespace thermoforge {
namespace {

std::uint64_t resolve_cap(std::uint64_t cap) { return cap == 0 ? default_enumeration_cap() : cap; }

double positive_zero(double x) { return x == 0.0 ? 0.0 : x; }

}  // namespace

AtomicLaw AtomicLaw::from_log_weights(std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw ContractError("atomic law: no atoms");
  std::sort(atoms.begin(), atoms.end());
  AtomicLaw law;
  std::size_t i = 0;
  while (i < atoms.size()) {
    // Chain together values whose successive gaps are below the merge tolerance.
    std::size_t j = i + 1;
    while (j < atoms.size() && atoms[j].first - atoms[j - 1].first <= kMergeTolerance) ++j;
    LogSumExp mass;
    for (std::size_t k = i; k < j; ++k) mass.add(atoms[k].second);
    Atom a;
    a.value = 0.5 * (atoms[i].first + atoms[j - 1].first);
    a.log_weight = mass.value();
    a.weight = std::exp(a.log_weight);
    if (a.weight > 0.0) law.atoms_.push_back(a);
    i = j;
  }
  CompensatedSum total;
  for (const auto& a : law.atoms_) total.add(a.weight);
  if (std::abs(total.value() - 1.0) > 1e-12) {
    throw ContractError(fmt::format("atomic law: weights sum to {:.17g}", total.value()));
  }
  return law;
}

AtomicLaw AtomicLaw::from_weights(const std::vector<std::pair<double, double>>& atoms) {
  std::vector<std::pair<double, double>> logs;
  logs.reserve(atoms.size());
  for (const auto& [value, weight] : atoms) {
    if (weight < 0.0) throw ContractError("atomic law: negative weight");
    logs.emplace_back(value, std::log(weight));
  }
  return from_log_weights(std::move(logs));
}

AtomicLaw AtomicLaw::point_mass(double value) { return from_log_weights({{value, 0.0}}); }

AtomicLaw AtomicLaw::negated() const {
  AtomicLaw law;
  law.atoms_.assign(atoms_.rbegin(), atoms_.rend());
  for (auto& a : law.atoms_) a.value = positive_zero(-a.value);
  return law;
}

const Atom* AtomicLaw::find(double value, double tolerance) const {
  // Nearest atom: distinct values closer than the tolerance do occur for
  // dense laws, while true mirrors agree to rounding.
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), value,
                             [](const Atom& a, double v) { return a.value < v; });
  const Atom* best = nullptr;
  if (it != atoms_.end()) best = &*it;
  if (it != atoms_.begin() && (!best || value - std::prev(it)->value < best->value - value)) best = &*std::prev(it);
  if (!best || std::abs(best->value - value) > tolerance) return nullptr;
  return best;
}

AtomicLaw sigma_law(const ShiftSpace& s, const Potential& g, const Reversal& theta, int n,
                    std::uint64_t cap) {
  check_compatible(s, theta);
  return sigma_law(s, g, pullback(s, g, theta), n, cap);
}

AtomicLaw sigma_law(const ShiftSpace& s, const Potential& g, const Potential& reversed, int n,
                    std::uint64_t cap) {
  std::vector<std::pair<double, double>> atoms;
  LogSumExp z;
  for_each_periodic(s, n, resolve_cap(cap), [&](std::span<const Symbol> w) {
    const double forward = evaluate(g, n, w);
    z.add(forward);
    atoms.emplace_back(forward - evaluate(reversed, n, w), forward);
  });
  if (atoms.empty()) throw NumericalError(fmt::format("sigma_law: M_{} is empty", n));
  const double log_z = z.value();
  for (auto& atom : atoms) atom.second -= log_z;
  return AtomicLaw::from_log_weights(std::move(atoms));
}

double jarzynski(const AtomicLaw& law) { return std::exp(renyi(law, 1.0)); }

double renyi(const AtomicLaw& law, double alpha) {
  LogSumExp acc;
  for (const auto& a : law.atoms()) acc.add(a.log_weight - alpha * a.value);
  return acc.value();
}

double relative_entropy(const AtomicLaw& law) {
  CompensatedSum acc;
  for (const auto& a : law.atoms()) acc.add(a.weight * a.value);
  return acc.value();
}

double detailed_symmetry_defect(const AtomicLaw& law) {
  double worst = 0.0;
  for (const auto& a : law.atoms()) {
    const Atom* mirror = law.find(-a.value);
    if (mirror == nullptr) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(mirror->weight - std::exp(a.log_weight - a.value)));
  }
  return worst;
}

EntropicPressure entropic_pressure(const ShiftSpace& s, const Potential& g, const Reversal& theta,
                                   const std::vector<double>& alpha_grid,
                                   const EntropicPressureOptions& options) {
  check_compatible(s, theta);
  EntropicPressure out;
  out.alpha = alpha_grid;
  out.e.assign(alpha_grid.size(), 0.0);
  out.tilted.assign(alpha_grid.size(), 0.0);
  if (g.as_additive() != nullptr) {
    out.route = EntropicRoute::kSpectral;
    out.base = spectral_pressure(s, g);
    const Potential reversed = pullback(s, g, theta);
    parallel_for(alpha_grid.size(), options.threads, [&](std::size_t i) {
      const double a = alpha_grid[i];
      out.tilted[i] = spectral_pressure(s, linear_combination(s, 1.0 - a, g, a, reversed));
      out.e[i] = out.tilted[i] - out.base;
    });
    return out;
  }
  out.route = EntropicRoute::kPeriodic;
  const int n = options.n_max;
  const AtomicLaw law = sigma_law(s, g, theta, n, options.cap);
  out.base = log_partition(s, g, n, options.cap) / n;
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    out.e[i] = renyi(law, alpha_grid[i]) / n;
    out.tilted[i] = out.e[i] + out.base;
  }
  return out;
}

double entropic_pressure_derivative(const ShiftSpace& s, const Potential& g, const Reversal& theta, double at,
                                    double h, const EntropicPressureOptions& options) {
  const std::vector<double> grid{at - h, at + h};
  const EntropicPressure e = entropic_pressure(s, g, theta, grid, options);
  return (e.e[1] - e.e[0]) / (grid[1] - grid[0]);
}

std::vector<double> default_alpha_grid() { return uniform_grid(-4.0, 5.0, 0.01); }

std::string to_string(RateProvenance provenance) {
  return provenance == RateProvenance::kLegendre ? "legendre_of_e" : "contraction_parametric";
}

std::optional<double> RateFunction::at(double s) const {
  if (grid.empty() || s < grid.front() || s > grid.back()) return std::nullopt;
  auto it = std::lower_bound(grid.begin(), grid.end(), s);
  const auto j = static_cast<std::size_t>(it - grid.begin());
  if (grid[j] == s) return values[j];
  const double t = (s - grid[j - 1]) / (grid[j] - grid[j - 1]);
  return (1.0 - t) * values[j - 1] + t * values[j];
}

std::optional<double> RateFunction::infimum(double a, double b) const {
  if (grid.empty()) return std::nullopt;
  const double lo = std::max(a, grid.front());
  const double hi = std::min(b, grid.back());
  if (lo > hi) return std::nullopt;
  double best = std::min(*at(lo), *at(hi));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] >= lo && grid[i] <= hi) best = std::min(best, values[i]);
  }
  return best;
}

double RateFunction::minimum() const { return *std::min_element(values.begin(), values.end()); }

double RateFunction::convexity_defect() const {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double h1 = grid[i] - grid[i - 1];
    const double h2 = grid[i + 1] - grid[i];
    const double d1 = (values[i] - values[i - 1]) / h1;
    const double d2 = (values[i + 1] - values[i]) / h2;
    worst = std::min(worst, (d2 - d1) * 0.5 * (h1 + h2));
  }
  return worst;
}

std::string rate_function_problem(const RateFunction& rate) {
  if (rate.grid.empty()) return "rate function: empty grid";
  if (const double d = rate.convexity_defect(); d < -1e-9) {
    return fmt::format("rate function: not convex (second difference {:.3e})", d);
  }
  if (const double m = rate.minimum(); std::abs(m) > 1e-8) {
    return fmt::format("rate function: minimum {:.3e} is not 0", m);
  }
  return {};
}

RateFunction legendre(const GridFunction& f, const std::vector<double>& s_grid) {
  if (f.x.empty() || f.x.size() != f.y.size()) throw ContractError("legendre: malformed grid function");
  RateFunction rate;
  rate.provenance = RateProvenance::kLegendre;
  rate.grid = s_grid;
  std::sort(rate.grid.begin(), rate.grid.end());
  const std::size_t last = f.x.size() - 1;
  for (double s : rate.grid) {
    double best = -std::numeric_limits<double>::infinity();
    double interior = best;
    std::size_t arg = 0;
    for (std::size_t i = 0; i <= last; ++i) {
      const double v = -s * f.x[i] - f.y[i];
      if (v > best) {
        best = v;
        arg = i;
      }
      if (i != 0 && i != last) interior = std::max(interior, v);
    }
    const bool at_edge = (arg == 0 || arg == last) && best > interior;
    rate.values.push_back(positive_zero(best));
    rate.boundary.push_back(at_edge ? 1 : 0);
  }
  return rate;
}

RateFunction legendre(const GridFunction& f) {
  if (f.x.size() < 3) throw ContractError("legendre: need at least three grid points");
  const std::size_t m = f.x.size();
  const double slope_lo = (f.y[1] - f.y[0]) / (f.x[1] - f.x[0]);
  const double slope_hi = (f.y[m - 1] - f.y[m - 2]) / (f.x[m - 1] - f.x[m - 2]);
  double s_max = std::max(std::abs(slope_lo), std::abs(slope_hi));
  if (!(s_max > 1e-12)) s_max = 1.0;
  constexpr int kHalf = 200;
  const double step = s_max / kHalf;
  std::vector<double> grid;
  for (int i = -kHalf; i <= kHalf; ++i) grid.push_back(i * step);
  auto zero = std::find(f.x.begin(), f.x.end(), 0.0);
  if (zero != f.x.begin() && zero != f.x.end() && zero + 1 != f.x.end()) {
    const auto z = static_cast<std::size_t>(zero - f.x.begin());
    const double s_bar = -(f.y[z + 1] - f.y[z - 1]) / (f.x[z + 1] - f.x[z - 1]);
    if (std::abs(s_bar) < s_max && s_bar != 0.0) {
      grid.push_back(s_bar);
      grid.push_back(-s_bar);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return legendre(f, grid);
}

double ft_empirical_check(const AtomicLaw& law, int n, double a, double b) {
  const double lo = n * a;
  const double hi = n * b;
  LogSumExp acc;
  LogSumExp all;  // relative to the mass as summed here, so Gamma = R gives 0 exactly
  for (const auto& atom : law.atoms()) {
    const double slack = 1e-9 * std::max(1.0, std::abs(atom.value));
    if (atom.value >= lo - slack && atom.value <= hi + slack) acc.add(atom.log_weight);
    all.add(atom.log_weight);
  }
  return (acc.value() - all.value()) / n;
}

double ft_empirical_check(const ShiftSpace& s, const Potential& g, const Reversal& theta, int n, double a,
                          double b, std::uint64_t cap) {
  return ft_empirical_check(sigma_law(s, g, theta, n, cap), n, a, b);
}

double chernoff_exponent(const AtomicLaw& law, int n) {
  LogSumExp acc;
  LogSumExp all;
  for (const auto& a : law.atoms()) {
    if (const Atom* mirror = law.find(-a.value)) acc.add(std::min(a.log_weight, mirror->log_weight));
    all.add(a.log_weight);
  }
  return positive_zero((acc.value() - all.value()) / n);
}

double stein_exponent(const AtomicLaw& law, int n) { return relative_entropy(law) / n; }

std::vector<double> hoeffding_alpha_grid() {
  std::vector<double> grid = uniform_grid(0.0, 0.99, 0.01);
  for (int j = 9; j <= 24; ++j) grid.push_back(1.0 - std::pow(10.0, -j / 4.0));
  return grid;
}

GridFunction hoeffding_curve(const GridFunction& e, const std::vector<double>& r_grid) {
  const double upper = 1.0 - 1e-6;
  GridFunction f;
  f.x = r_grid;
  for (double r : r_grid) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e.x.size(); ++i) {
      const double a = e.x[i];
      if (a < 0.0 || a > upper) continue;
      best = std::min(best, (a * r + e.y[i]) / (1.0 - a));
    }
    if (!std::isfinite(best)) throw ContractError("hoeffding_curve: no grid point in [0, 1 - 1e-6]");
    f.y.push_back(positive_zero(-best));
  }
  return f;
}

RateFunction contraction_parametric(const ShiftSpace& s, const Potential& g, const Reversal& theta,
                                    const std::vector<double>& alpha_grid, int threads) {
  check_compatible(s, theta);
  if (g.as_additive() == nullptr) {
    throw ContractError("contraction_parametric: locally constant potential required");
  }
  const Potential reversed = pullback(s, g, theta);
  const double p_g = spectral_pressure(s, g);
  struct Point {
    double s, rate, alpha;
  };
  std::vector<Point> points(alpha_grid.size());
  parallel_for(alpha_grid.size(), threads, [&](std::size_t i) {
    const double a = alpha_grid[i];
    const MarkovMeasure q = equilibrium_markov(s, linear_combination(s, 1.0 - a, g, a, reversed));
    points[i] = {mean_entropy_production(q, g, theta), rate_level2(q, g, p_g), a};
  });
  std::stable_sort(points.begin(), points.end(), [](const Point& x, const Point& y) { return x.s < y.s; });
  RateFunction rate;
  rate.provenance = RateProvenance::kContractionParametric;
  for (const auto& p : points) {
    rate.grid.push_back(p.s);
    rate.values.push_back(p.rate);
    rate.boundary.push_back(0);
    rate.parameter.push_back(p.alpha);
  }
  return rate;
}

}  // namespace thermoforge
