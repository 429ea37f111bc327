#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermoforge/potential.hpp"
#include "thermoforge/pressure.hpp"
#include "thermoforge/shift_space.hpp"

namespace thermoforge {

struct Atom {
  double value = 0.0;
  double weight = 0.0;
  double log_weight = 0.0;
};

/// Finitely supported law on the real line, sorted by value. Values closer
/// than kMergeTolerance are merged into one atom.
class AtomicLaw {
 public:
  static constexpr double kMergeTolerance = 1e-12;
  /// Tolerance used to pair an atom at s with the atom at -s.
  static constexpr double kMatchTolerance = 1e-9;

  AtomicLaw() = default;

  /// Atoms given as (value, log weight); the weights must sum to 1 within 1e-12.
  static AtomicLaw from_log_weights(std::vector<std::pair<double, double>> atoms);
  static AtomicLaw from_weights(const std::vector<std::pair<double, double>>& atoms);
  static AtomicLaw point_mass(double value);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  /// Law of -X.
  AtomicLaw negated() const;

  /// Atom nearest to `value`, if within `tolerance`.
  const Atom* find(double value, double tolerance = kMatchTolerance) const;

 private:
  std::vector<Atom> atoms_;
};

/// Law of sigma_n under the periodic-orbit measure P_n.
AtomicLaw sigma_law(const ShiftSpace& s, const Potential& g, const Reversal& theta, int n,
                    std::uint64_t cap = 0);
/// Same, with the reversed sequence G o theta supplied by the caller.
AtomicLaw sigma_law(const ShiftSpace& s, const Potential& g, const Potential& reversed, int n,
                    std::uint64_t cap = 0);

/// sum w e^{-s}.
double jarzynski(const AtomicLaw& law);
/// log sum w e^{-alpha s}.
double renyi(const AtomicLaw& law, double alpha);
/// sum w s.
double relative_entropy(const AtomicLaw& law);

/// Largest |w(-s) - w(s) e^{-s}| over the atoms; +inf when some atom has no
/// mirror image.
double detailed_symmetry_defect(const AtomicLaw& law);

struct GridFunction {
  std::vector<double> x;
  std::vector<double> y;
};

enum class EntropicRoute { kSpectral, kPeriodic };

struct EntropicPressureOptions {
  int n_max = 12;           // periodic route
  std::uint64_t cap = 0;
  int threads = 1;
};

/// e(alpha) = p((1 - alpha) G + alpha G o theta) - p(G). The tilted values are
/// kept alongside so that the unnormalized quantity is available too.
struct EntropicPressure {
  EntropicRoute route = EntropicRoute::kSpectral;
  std::vector<double> alpha;
  std::vector<double> e;
  std::vector<double> tilted;
  double base = 0.0;

  GridFunction grid() const { return {alpha, e}; }
};

/// Spectral route for locally constant G, periodic route at n_max otherwise.
EntropicPressure entropic_pressure(const ShiftSpace& s, const Potential& g, const Reversal& theta,
                                   const std::vector<double>& alpha_grid,
                                   const EntropicPressureOptions& options = {});

inline constexpr double kDerivativeStep = 1e-4;

/// e'(at) by central difference.
double entropic_pressure_derivative(const ShiftSpace& s, const Potential& g, const Reversal& theta,
                                    double at, double h = kDerivativeStep,
                                    const EntropicPressureOptions& options = {});

/// Default alpha grid [-4, 5], step 0.01 (symmetric about 1/2).
std::vector<double> default_alpha_grid();

enum class RateProvenance { kLegendre, kContractionParametric };

std::string to_string(RateProvenance provenance);

struct RateFunction {
  std::vector<double> grid;
  std::vector<double> values;
  /// Maximum attained at the end of the alpha grid: the value is a lower bound.
  std::vector<std::uint8_t> boundary;
  /// Tilt parameter of each point (parametric curves only).
  std::vector<double> parameter;
  RateProvenance provenance = RateProvenance::kLegendre;

  /// Linear interpolation on the grid; nullopt outside it.
  std::optional<double> at(double s) const;
  /// inf of I over [a, b]: grid points inside plus interpolated endpoints.
  std::optional<double> infimum(double a, double b) const;
  double minimum() const;
  /// Most negative discrete second divided difference (0 when convex).
  double convexity_defect() const;
};

/// Empty when the rate function is convex (to 1e-9) with minimum 0 (to 1e-8).
std::string rate_function_problem(const RateFunction& rate);

/// I(s) = max over the grid of f of (-s beta - f(beta)), i.e. the transform
/// sup_alpha (s alpha - f(-alpha)).
RateFunction legendre(const GridFunction& f, const std::vector<double>& s_grid);
/// Default s-grid: 401 points symmetric about 0 spanning the slopes of f at
/// its grid ends, plus +-s_bar with s_bar = -f'(0) when 0 is a grid point.
RateFunction legendre(const GridFunction& f);

/// (1/n) log P_n{sigma_n / n in [a, b]}; -inf for an empty event.
double ft_empirical_check(const AtomicLaw& law, int n, double a, double b);
double ft_empirical_check(const ShiftSpace& s, const Potential& g, const Reversal& theta, int n, double a,
                          double b, std::uint64_t cap = 0);

/// (1/n) log sum_s min(w(s), w(-s)).
double chernoff_exponent(const AtomicLaw& law, int n);
/// (1/n) relative_entropy.
double stein_exponent(const AtomicLaw& law, int n);

/// [0, 0.99] with step 0.01 followed by 1 - 10^{-j/4}, j = 9..24.
std::vector<double> hoeffding_alpha_grid();

/// f(r) = -min over the points of e with 0 <= alpha <= 1 - 1e-6 of
/// (alpha r + e(alpha)) / (1 - alpha).
GridFunction hoeffding_curve(const GridFunction& e, const std::vector<double>& r_grid);

/// Parametric curve alpha -> (ep(Q_alpha), I(Q_alpha)) with Q_alpha the
/// equilibrium of (1 - alpha) G + alpha G o theta, sorted by s.
RateFunction contraction_parametric(const ShiftSpace& s, const Potential& g, const Reversal& theta,
                                    const std::vector<double>& alpha_grid, int threads = 1);

}  // namespace thermoforge
