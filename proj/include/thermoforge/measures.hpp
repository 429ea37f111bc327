#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "thermoforge/markov.hpp"
#include "thermoforge/potential.hpp"
#include "thermoforge/shift_space.hpp"

namespace thermoforge {

struct PofpAtom {
  PeriodicWord word;
  double weight = 0.0;
  double log_weight = 0.0;
};

/// P_n = Z_n^-1 sum_{x in M_n} exp(G_n(x)) delta_x, atoms in lexicographic order.
struct PofpMeasure {
  int n = 0;
  std::vector<PofpAtom> atoms;
  double log_z = 0.0;

  /// Index of the atom carrying `word` (binary search over the sorted atoms).
  std::optional<std::size_t> find(const PeriodicWord& word) const;
};

PofpMeasure pofp_measure(const ShiftSpace& s, const Potential& g, int n, std::uint64_t cap = 0);

/// Distribution of the k-windows of a periodic word, each rotation weighted 1/n.
struct BlockEmpirical {
  int block_length = 0;
  std::map<Word, double> frequencies;

  double frequency(const Word& block) const;
  friend auto operator<=>(const BlockEmpirical&, const BlockEmpirical&) = default;
};

BlockEmpirical block_empirical(const PeriodicWord& w, int k);

/// Largest difference between the left and right (k-1)-marginals.
double marginal_inconsistency(const BlockEmpirical& mu);

/// Law of the k-block empirical measure of x under P_n, merged over equal
/// empirical measures (ordered).
struct EmpiricalLaw {
  int n = 0;
  int k = 0;
  std::vector<std::pair<BlockEmpirical, double>> atoms;

  double probability(const std::function<bool(const BlockEmpirical&)>& event) const;
  /// (1/n) log P_n{mu_n in event}; -inf for null events.
  double log_rate(const std::function<bool(const BlockEmpirical&)>& event) const;
};

EmpiricalLaw pushforward_empirical(const PofpMeasure& p, int k);

/// Q o theta as a Markov measure of the same memory.
MarkovMeasure reverse_markov(const MarkovMeasure& q, const Reversal& theta);

/// I(Q) = -G(Q) - h(Q) + p_G.
double rate_level2(const MarkovMeasure& q, const Potential& g, double p_g);

/// ep(Q) = G(Q) - G(Q o theta).
double mean_entropy_production(const MarkovMeasure& q, const Potential& g, const Reversal& theta);

/// (1/n) log K_n with K_n the worst ratio between Q([u]) and
/// exp(G_n(u) - n p_G) over admissible n-words u. G_n(u) sums the n-r+1
/// complete windows inside u.
double weak_gibbs_constants(const MarkovMeasure& q, const Potential& g, double p_g, int n,
                            std::uint64_t cap = 0);

}  // namespace thermoforge
