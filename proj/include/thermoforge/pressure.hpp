#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thermoforge/markov.hpp"
#include "thermoforge/potential.hpp"
#include "thermoforge/shift_space.hpp"

namespace thermoforge {

enum class PressureMethod { kPeriodic, kSpectral, kSpanning, kSeparated };

std::string to_string(PressureMethod method);

struct PressurePoint {
  int n = 0;
  double value = 0.0;
};

struct PressureEstimate {
  PressureMethod method = PressureMethod::kPeriodic;
  std::vector<PressurePoint> per_n;
  double extrapolated = 0.0;          // last per_n value
  std::optional<double> richardson;   // log Z_n - log Z_{n-1}, when requested
  bool monotone = false;              // per_n values monotone in n
  bool oscillating = false;           // successive differences change sign more than once
};

/// log sum_{w in M_n} exp(G_n(w)), streamed with a compensated log-sum-exp.
double log_partition(const ShiftSpace& s, const Potential& g, int n, std::uint64_t cap = 0);

struct PeriodicPressureOptions {
  std::uint64_t cap = 0;
  bool richardson = false;
};

/// p_n = log Z_n / n for n = 1..n_max.
PressureEstimate pressure_periodic(const ShiftSpace& s, const Potential& g, int n_max,
                                   const PeriodicPressureOptions& options = {});

/// Transfer matrix on the (r-1)-block presentation of a range-r potential
/// (letters when r = 1, with L(a, b) = A(a, b) exp(g(b))).
struct TransferMatrix {
  Eigen::MatrixXd matrix;
  std::vector<Word> states;
  int block_length = 1;
};

inline constexpr int kTransferStateCap = 4096;

TransferMatrix transfer_matrix(const ShiftSpace& s, const Potential& g,
                               int state_cap = kTransferStateCap);

/// log trace(L^n), computed with rescaled squaring.
double log_trace_power(const Eigen::MatrixXd& matrix, int n);

struct PerronOptions {
  double tolerance = 1e-13;
  int max_iterations = 100000;
};

struct PerronResult {
  double eigenvalue = 0.0;
  Eigen::VectorXd right;  // max-normalized
  Eigen::VectorXd left;   // max-normalized
  int iterations = 0;
};

/// Perron root and vectors of a primitive nonnegative matrix by power
/// iteration, stopped when the Collatz-Wielandt bracket closes to `tolerance`
/// (relative). Throws NumericalError when it does not.
PerronResult perron(const Eigen::MatrixXd& matrix, const PerronOptions& options = {});

/// "reducible", "irreducible with period d", or empty when primitive.
std::string describe_non_primitivity(const ShiftSpace& s);

/// log lambda_max of the transfer matrix; single exact entry.
PressureEstimate pressure_spectral(const ShiftSpace& s, const Potential& g,
                                   const PerronOptions& options = {});
double spectral_pressure(const ShiftSpace& s, const Potential& g);

/// Finite-scale spanning/separated values at Bowen radius 2^-k.
///
/// `spanning` and `separated` are (1/n) log of the minimal and maximal
/// weighted sums over two-sided cylinders. For additive potentials on a
/// primitive subshift `lower <= p <= upper` is guaranteed: `upper` is the
/// separated value (submultiplicative), `lower` is the supermultiplicative
/// spanning bound at k = 0 with the primitivity connector charged at the
/// minimal one-step weight. Otherwise `certified` is false and the bracket is
/// (spanning, separated).
struct PressureBounds {
  int n = 0;
  int k = 0;
  double spanning = 0.0;
  double separated = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool certified = false;
};

PressureBounds pressure_bounds_spanning_separated(const ShiftSpace& s, const Potential& g, int n, int k,
                                                  std::uint64_t cap = 0);

/// Perron equilibrium chain P_uv = L_uv rv_v / (lambda rv_u), pi_u ~ lv_u rv_u.
MarkovMeasure equilibrium_markov(const ShiftSpace& s, const Potential& g);

}  // namespace thermoforge
