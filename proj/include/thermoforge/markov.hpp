#pragma once

#include <Eigen/Dense>
#include "json.hpp"
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "thermoforge/potential.hpp"
#include "thermoforge/shift_space.hpp"

namespace thermoforge {

/// Stationary Markov chain of memory `order` on a subshift of finite type.
///
/// States are the admissible order-words in lexicographic order; the chain
/// moves from u to u[1..]c. Construction checks that rows sum to 1 and that
/// the stationary vector is left-invariant, both within 1e-12, and that no
/// mass sits on a transition the subshift forbids.
class MarkovMeasure {
 public:
  static constexpr double kTolerance = 1e-12;

  static MarkovMeasure make(const ShiftSpace& s, int order, Eigen::MatrixXd transition,
                            Eigen::VectorXd stationary);
  /// Solves for the stationary vector; the chain must be irreducible.
  static MarkovMeasure from_transition(const ShiftSpace& s, int order, Eigen::MatrixXd transition);
  /// i.i.d. letters with the given probabilities (order 1).
  static MarkovMeasure bernoulli(const ShiftSpace& s, const std::vector<double>& probabilities);

  int order() const { return order_; }
  int alphabet_size() const { return alphabet_size_; }
  int state_count() const { return static_cast<int>(states_.size()); }
  const std::vector<Word>& states() const { return states_; }
  const Eigen::MatrixXd& transition() const { return transition_; }
  const Eigen::VectorXd& stationary() const { return stationary_; }
  const ShiftSpace& space() const { return space_; }

  std::optional<int> index_of(std::span<const Symbol> word) const;
  /// Index of the state reached from `state` by appending `symbol`, if admissible.
  std::optional<int> successor(int state, Symbol symbol) const;
  double probability(int from, int to) const { return transition_(from, to); }

  /// log Q([word]); -inf for null cylinders.
  double cylinder_log_probability(std::span<const Symbol> word) const;

  /// Largest violation of row sums, invariance and normalization.
  double invariant_residual() const;

 private:
  MarkovMeasure(ShiftSpace space, int order, std::vector<Word> states, Eigen::MatrixXd transition,
                Eigen::VectorXd stationary);

  ShiftSpace space_;
  int order_;
  int alphabet_size_;
  std::vector<Word> states_;
  Eigen::MatrixXd transition_;
  Eigen::VectorXd stationary_;
  std::vector<int> successor_;  // state * alphabet + symbol -> state or -1
};

/// Admissible words of the given length, lexicographic.
std::vector<Word> admissible_words(const ShiftSpace& s, int length);

/// The same path measure presented with a longer memory.
MarkovMeasure refine(const MarkovMeasure& q, int order);

/// h(Q) = -sum_u pi_u sum_v P_uv log P_uv.
double entropy_rate(const MarkovMeasure& q);

/// G(Q) for a locally constant potential; refines Q when its memory is short.
double mean_potential(const MarkovMeasure& q, const Potential& g);

/// Normalized i.i.d. uniform(0.1, 1) weights on every admissible transition.
MarkovMeasure random_markov(const ShiftSpace& s, int order, std::mt19937_64& rng);

nlohmann::json to_json(const MarkovMeasure& q);

}  // namespace thermoforge
