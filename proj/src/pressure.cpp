#include "thermoforge/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>
#include <queue>

#include "thermoforge/errors.hpp"
#include "thermoforge/numeric.hpp"

namespace thermoforge {
namespace {

std::uint64_t resolve_cap(std::uint64_t cap) { return cap == 0 ? default_enumeration_cap() : cap; }

const AdditiveLocal& require_additive(const Potential& g, const char* what) {
  const auto* a = g.as_additive();
  if (!a) throw ContractError(fmt::format("{}: locally constant potential required", what));
  return *a;
}

std::vector<int> bfs_levels(const ShiftSpace& s, bool forward) {
  const int l = s.alphabet_size();
  std::vector<int> level(static_cast<std::size_t>(l), -1);
  std::queue<int> pending;
  level[0] = 0;
  pending.push(0);
  while (!pending.empty()) {
    const int u = pending.front();
    pending.pop();
    for (int v = 0; v < l; ++v) {
      const bool edge = forward ? s.allowed(u, v) : s.allowed(v, u);
      if (edge && level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        pending.push(v);
      }
    }
  }
  return level;
}

}  // namespace

std::string to_string(PressureMethod method) {
  switch (method) {
    case PressureMethod::kPeriodic:
      return "periodic";
    case PressureMethod::kSpectral:
      return "spectral";
    case PressureMethod::kSpanning:
      return "spanning";
    case PressureMethod::kSeparated:
      return "separated";
  }
  return "unknown";
}

double log_partition(const ShiftSpace& s, const Potential& g, int n, std::uint64_t cap) {
  LogSumExp acc;
  for_each_periodic(s, n, resolve_cap(cap), [&](std::span<const Symbol> w) { acc.add(evaluate(g, n, w)); });
  if (acc.empty()) {
    throw NumericalError(fmt::format("log_partition: M_{} is empty (degenerate subshift)", n));
  }
  return acc.value();
}

PressureEstimate pressure_periodic(const ShiftSpace& s, const Potential& g, int n_max,
                                   const PeriodicPressureOptions& options) {
  if (n_max < 1) throw ContractError("pressure_periodic: n_max must be >= 1");
  // Fail before doing any work when the largest n is out of reach.
  check_enumeration_cap(s, n_max, resolve_cap(options.cap), "pressure_periodic");
  PressureEstimate est;
  est.method = PressureMethod::kPeriodic;
  std::vector<double> log_z;
  for (int n = 1; n <= n_max; ++n) {
    log_z.push_back(log_partition(s, g, n, options.cap));
    est.per_n.push_back({n, log_z.back() / n});
  }
  est.extrapolated = est.per_n.back().value;
  if (options.richardson && n_max >= 2) est.richardson = log_z[log_z.size() - 1] - log_z[log_z.size() - 2];

  bool increasing = true;
  bool decreasing = true;
  int sign_changes = 0;
  double previous_diff = 0.0;
  for (std::size_t i = 1; i < est.per_n.size(); ++i) {
    const double diff = est.per_n[i].value - est.per_n[i - 1].value;
    increasing = increasing && diff >= 0.0;
    decreasing = decreasing && diff <= 0.0;
    if (i > 1 && diff * previous_diff < 0.0) ++sign_changes;
    previous_diff = diff;
  }
  est.monotone = increasing || decreasing;
  est.oscillating = sign_changes > 1;
  return est;
}

TransferMatrix transfer_matrix(const ShiftSpace& s, const Potential& g, int state_cap) {
  const AdditiveLocal& a = require_additive(g, "transfer_matrix");
  TransferMatrix t;
  t.block_length = std::max(1, a.range() - 1);
  long double state_bound = 1.0L;
  for (int i = 0; i < t.block_length; ++i) state_bound *= static_cast<long double>(s.alphabet_size());
  if (state_bound > static_cast<long double>(state_cap)) {
    throw ResourceError(fmt::format("transfer_matrix: block recoding of range {} needs up to {}^{} states, cap {}",
                                    a.range(), s.alphabet_size(), t.block_length, state_cap));
  }
  t.states = admissible_words(s, t.block_length);
  std::map<Word, Eigen::Index> index;
  for (std::size_t i = 0; i < t.states.size(); ++i) index.emplace(t.states[i], static_cast<Eigen::Index>(i));
  const auto n = static_cast<Eigen::Index>(t.states.size());
  t.matrix = Eigen::MatrixXd::Zero(n, n);
  Word extended(static_cast<std::size_t>(t.block_length) + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Word& u = t.states[static_cast<std::size_t>(i)];
    std::copy(u.begin(), u.end(), extended.begin());
    for (Symbol c = 0; c < s.alphabet_size(); ++c) {
      if (!s.allowed(u.back(), c)) continue;
      extended.back() = c;
      Word v(extended.begin() + 1, extended.end());
      // r = 1 reads the arriving letter, r >= 2 the whole r-word u.c.
      const double weight = a.range() == 1 ? a.value(std::span<const Symbol>(extended).last(1))
                                           : a.value(extended);
      t.matrix(i, index.at(v)) = std::exp(weight);
    }
  }
  return t;
}

double log_trace_power(const Eigen::MatrixXd& matrix, int n) {
  if (n < 1) throw ContractError("log_trace_power: n must be >= 1");
  // Binary powering; every product is divided by its largest entry and the
  // scale is kept in log form.
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(matrix.rows(), matrix.cols());
  double log_result = 0.0;
  Eigen::MatrixXd base = matrix;
  double log_base = 0.0;
  auto normalize = [](Eigen::MatrixXd& m, double& log_scale) {
    const double top = m.cwiseAbs().maxCoeff();
    if (top > 0.0) {
      m /= top;
      log_scale += std::log(top);
    }
  };
  normalize(base, log_base);
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) {
      result = result * base;
      log_result += log_base;
      normalize(result, log_result);
    }
    if (e > 1) {
      base = base * base;
      log_base *= 2.0;
      normalize(base, log_base);
    }
  }
  const double trace = result.trace();
  if (!(trace > 0.0)) return kNegInf;
  return log_result + std::log(trace);
}

PerronResult perron(const Eigen::MatrixXd& matrix, const PerronOptions& options) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw ContractError("perron: square nonempty matrix required");
  }
  auto iterate = [&](const Eigen::MatrixXd& m, Eigen::VectorXd& x, int& iterations) {
    x = Eigen::VectorXd::Ones(m.rows());
    for (iterations = 1; iterations <= options.max_iterations; ++iterations) {
      Eigen::VectorXd y = m * x;
      const Eigen::ArrayXd ratio = y.array() / x.array();
      const double lo = ratio.minCoeff();
      const double hi = ratio.maxCoeff();
      if (!(lo > 0.0) || !std::isfinite(hi)) {
        throw NumericalError("perron: iterate lost positivity; matrix is reducible");
      }
      x = y / y.maxCoeff();
      if (hi - lo <= options.tolerance * hi) return 0.5 * (lo + hi);
    }
    throw NumericalError(fmt::format(
        "perron: no convergence in {} iterations; the matrix is reducible or periodic",
        options.max_iterations));
  };
  PerronResult result;
  int right_iterations = 0;
  int left_iterations = 0;
  result.eigenvalue = iterate(matrix, result.right, right_iterations);
  const Eigen::MatrixXd transposed = matrix.transpose();
  iterate(transposed, result.left, left_iterations);
  result.iterations = std::max(right_iterations, left_iterations);
  return result;
}

std::string describe_non_primitivity(const ShiftSpace& s) {
  if (s.is_primitive()) return {};
  const std::vector<int> forward = bfs_levels(s, true);
  const std::vector<int> backward = bfs_levels(s, false);
  const bool irreducible =
      std::none_of(forward.begin(), forward.end(), [](int v) { return v < 0; }) &&
      std::none_of(backward.begin(), backward.end(), [](int v) { return v < 0; });
  if (!irreducible) return "transition matrix is reducible";
  int period = 0;
  for (int u = 0; u < s.alphabet_size(); ++u) {
    for (int v = 0; v < s.alphabet_size(); ++v) {
      if (s.allowed(u, v)) {
        period = std::gcd(period, std::abs(forward[static_cast<std::size_t>(u)] + 1 -
                                           forward[static_cast<std::size_t>(v)]));
      }
    }
  }
  return fmt::format("transition matrix is irreducible with period {}", period);
}

PressureEstimate pressure_spectral(const ShiftSpace& s, const Potential& g, const PerronOptions& options) {
  if (auto problem = describe_non_primitivity(s); !problem.empty()) {
    throw NumericalError("pressure_spectral: " + problem + "; the Perron iteration needs a primitive matrix");
  }
  const TransferMatrix t = transfer_matrix(s, g);
  const PerronResult pf = perron(t.matrix, options);
  PressureEstimate est;
  est.method = PressureMethod::kSpectral;
  est.per_n.push_back({0, std::log(pf.eigenvalue)});
  est.extrapolated = est.per_n.front().value;
  est.monotone = true;
  return est;
}

double spectral_pressure(const ShiftSpace& s, const Potential& g) {
  return pressure_spectral(s, g).extrapolated;
}

PressureBounds pressure_bounds_spanning_separated(const ShiftSpace& s, const Potential& g, int n, int k,
                                                  std::uint64_t cap) {
  CylinderOptions options;
  options.cap = cap;
  LogSumExp spanning;
  LogSumExp separated;
  for (const auto& c : cylinder_extremes(s, g, n, k, options)) {
    spanning.add(c.min);
    separated.add(c.max);
  }
  PressureBounds b;
  b.n = n;
  b.k = k;
  b.spanning = spanning.value() / n;
  b.separated = separated.value() / n;
  b.lower = b.spanning;
  b.upper = b.separated;
  const auto* a = g.as_additive();
  if (a == nullptr || !s.is_primitive()) return b;

  // Any two words can be joined through q-1 letters (A^q > 0), which makes
  // T_j = S_{j-c} exp(c g_min) supermultiplicative with c = q-1.
  const int c = *s.primitivity_power() - 1;
  if (n - c < 1) return b;
  double g_min = std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < a->table_size(); ++code) {
    if (a->defined_at(code)) g_min = std::min(g_min, a->value_at(code));
  }
  LogSumExp short_spanning;
  for (const auto& cyl : cylinder_extremes(s, g, n - c, 0, options)) short_spanning.add(cyl.min);
  b.lower = (short_spanning.value() + c * g_min) / n;
  b.upper = b.separated;
  b.certified = true;
  return b;
}

MarkovMeasure equilibrium_markov(const ShiftSpace& s, const Potential& g) {
  if (auto problem = describe_non_primitivity(s); !problem.empty()) {
    throw NumericalError("equilibrium_markov: " + problem);
  }
  const TransferMatrix t = transfer_matrix(s, g);
  const PerronResult pf = perron(t.matrix);
  const auto n = t.matrix.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index u = 0; u < n; ++u) {
    for (Eigen::Index v = 0; v < n; ++v) {
      if (t.matrix(u, v) != 0.0) p(u, v) = t.matrix(u, v) * pf.right(v) / (pf.eigenvalue * pf.right(u));
    }
    p.row(u) /= p.row(u).sum();
  }
  Eigen::VectorXd pi = pf.left.cwiseProduct(pf.right);
  pi /= pi.sum();
  for (int it = 0; it < 4; ++it) {
    pi = (pi.transpose() * p).transpose();
    pi /= pi.sum();
  }
  return MarkovMeasure::make(s, t.block_length, std::move(p), std::move(pi));
}

}  // namespace thermoforge
