#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <variant>
#include <vector>

#include "thermoforge/shift_space.hpp"

namespace thermoforge {

/// Locally constant potential g depending on `range` consecutive symbols.
/// The table is defined exactly on the admissible range-words.
class AdditiveLocal {
 public:
  AdditiveLocal(int alphabet_size, int range, std::vector<double> table,
                std::vector<std::uint8_t> defined);

  int range() const { return range_; }
  int alphabet_size() const { return alphabet_size_; }

  std::size_t code(std::span<const Symbol> window) const;
  bool defined(std::span<const Symbol> window) const { return defined_[code(window)] != 0; }
  /// g(window); the window must be admissible (asserted).
  double value(std::span<const Symbol> window) const;
  double value_at(std::size_t code) const { return table_[code]; }
  bool defined_at(std::size_t code) const { return defined_[code] != 0; }
  std::size_t table_size() const { return table_.size(); }

  /// Largest |g| over the table.
  double sup_norm() const;

 private:
  int alphabet_size_;
  int range_;
  std::vector<double> table_;
  std::vector<std::uint8_t> defined_;
};

enum class MatrixNorm { kInfinity, kOne, kFrobenius };

/// G_n(x) = log ||M_{x_0} M_{x_1} ... M_{x_{n-1}}|| with strictly positive
/// matrices (almost additive).
struct MatrixProduct {
  std::vector<Eigen::MatrixXd> matrices;
  MatrixNorm norm = MatrixNorm::kInfinity;

  int dimension() const { return static_cast<int>(matrices.front().rows()); }
};

/// Arbitrary sequence {G_n}, evaluated at the periodic point spelled by
/// `period` (any period), for n <= horizon.
struct ExplicitSequence {
  using Evaluator = std::function<double(int n, std::span<const Symbol> period)>;
  int horizon = 0;
  Evaluator evaluator;
};

enum class PotentialKind { kAdditive, kMatrixProduct, kExplicit };

class Potential {
 public:
  static Potential additive(const ShiftSpace& s, int range,
                            const std::function<double(std::span<const Symbol>)>& table);
  /// Table keyed by word; must cover exactly the admissible range-words.
  static Potential additive(const ShiftSpace& s, int range, const std::map<Word, double>& table);
  static Potential letter(const ShiftSpace& s, const std::vector<double>& g);
  static Potential zero(const ShiftSpace& s);
  static Potential matrix_product(const ShiftSpace& s, std::vector<Eigen::MatrixXd> matrices,
                                  MatrixNorm norm = MatrixNorm::kInfinity);
  static Potential explicit_sequence(int horizon, ExplicitSequence::Evaluator evaluator);

  PotentialKind kind() const;
  const AdditiveLocal* as_additive() const { return std::get_if<AdditiveLocal>(&data_); }
  const MatrixProduct* as_matrix_product() const { return std::get_if<MatrixProduct>(&data_); }
  const ExplicitSequence* as_explicit() const { return std::get_if<ExplicitSequence>(&data_); }

  /// Number of coordinates beyond x_{n-1} that G_n reads: range-1 for
  /// additive potentials, 0 for matrix products, -1 (unknown) for explicit.
  int lookahead() const;

 private:
  explicit Potential(std::variant<AdditiveLocal, MatrixProduct, ExplicitSequence> data)
      : data_(std::move(data)) {}

  std::variant<AdditiveLocal, MatrixProduct, ExplicitSequence> data_;
};

/// log of the chosen norm of a matrix product, with running rescaling.
double log_norm_of_product(const MatrixProduct& mp, std::span<const Symbol> letters);

/// G_n at the periodic point x_j = period[j mod p] (p = period length).
double evaluate(const Potential& g, int n, std::span<const Symbol> period);

/// G_n on a periodic word with n = its period (the Birkhoff sum S_n g in the
/// additive case).
double birkhoff(const Potential& g, const PeriodicWord& w);

/// Value on a finite word: sum over the complete range-windows inside the
/// word (additive) or log-norm of the full product (matrix). Not defined for
/// explicit sequences.
double word_sum(const Potential& g, std::span<const Symbol> word);

/// sigma_n(w) = G_n(w) - G_n(theta_n w).
double entropy_production(const ShiftSpace& s, const Potential& g, const Reversal& theta,
                          const PeriodicWord& w);

/// The pulled-back sequence G o theta as a potential of the same kind
/// (explicit sequences are wrapped).
Potential pullback(const ShiftSpace& s, const Potential& g, const Reversal& theta);

/// a*G1 + b*G2 for additive potentials on the same shift (ranges may differ).
Potential linear_combination(const ShiftSpace& s, double a, const Potential& g1, double b,
                             const Potential& g2);

/// (1 - alpha) G + alpha G o theta.
struct TiltedPotential {
  Potential base;
  Reversal reversal;
  double alpha = 0.0;

  double evaluate(const ShiftSpace& s, const PeriodicWord& w) const;
  /// Additive base -> additive table; otherwise an explicit sequence.
  Potential materialize(const ShiftSpace& s) const;
};

/// Extremes of G_n over a two-sided cylinder fixed on coordinates -k..n-1+k.
struct CylinderExtremes {
  Word window;
  double min = 0.0;
  double max = 0.0;
};

struct CylinderOptions {
  std::uint64_t cap = 0;       // 0: default enumeration cap
  int representative_period = 0;  // explicit sequences only; 0: n + 2k + max(2, primitivity)
};

/// One entry per admissible window of length n + 2k, lexicographic. Additive
/// and matrix potentials are evaluated exactly over all points of the
/// cylinder; explicit sequences over periodic representatives.
std::vector<CylinderExtremes> cylinder_extremes(const ShiftSpace& s, const Potential& g, int n,
                                                int k, const CylinderOptions& options = {});

/// sup over Bowen balls B_n(x, 2^-k) of (1/n)|G_n(y) - G_n(z)|.
double variation(const ShiftSpace& s, const Potential& g, int n, int k,
                 const CylinderOptions& options = {});

/// max over w in M_n of (1/n)|G_n(w) - k^-1 S_n G_k(w)|.
double aa_defect(const ShiftSpace& s, const Potential& g, int k, int n, std::uint64_t cap = 0);

/// max over w in M_n of |G_n(w)| / n.
double seminorm_estimate(const ShiftSpace& s, const Potential& g, int n, std::uint64_t cap = 0);

/// Additive approximation x -> k^-1 G_k(x) as a range-k locally constant
/// potential (matrix products only; G_k reads exactly k symbols).
Potential block_average(const ShiftSpace& s, const Potential& g, int k, std::uint64_t cap = 0);

/// C with |G_{m+n} - G_m - G_n o phi^m| <= C for a positive matrix product.
double almost_additivity_constant(const MatrixProduct& mp);

}  // namespace thermoforge
