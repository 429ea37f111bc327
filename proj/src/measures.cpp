#include "thermoforge/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "thermoforge/errors.hpp"
#include "thermoforge/numeric.hpp"
#include "thermoforge/pressure.hpp"

namespace thermoforge {
namespace {

std::uint64_t resolve_cap(std::uint64_t cap) { return cap == 0 ? default_enumeration_cap() : cap; }

}  // namespace

std::optional<std::size_t> PofpMeasure::find(const PeriodicWord& word) const {
  auto it = std::lower_bound(atoms.begin(), atoms.end(), word,
                             [](const PofpAtom& a, const PeriodicWord& w) { return a.word < w; });
  if (it == atoms.end() || it->word != word) return std::nullopt;
  return static_cast<std::size_t>(it - atoms.begin());
}

PofpMeasure pofp_measure(const ShiftSpace& s, const Potential& g, int n, std::uint64_t cap) {
  PofpMeasure p;
  p.n = n;
  LogSumExp z;
  for_each_periodic(s, n, resolve_cap(cap), [&](std::span<const Symbol> w) {
    const double value = evaluate(g, n, w);
    z.add(value);
    p.atoms.push_back(PofpAtom{PeriodicWord{Word(w.begin(), w.end())}, 0.0, value});
  });
  if (p.atoms.empty()) throw NumericalError(fmt::format("pofp_measure: M_{} is empty", n));
  p.log_z = z.value();
  for (auto& atom : p.atoms) {
    atom.log_weight -= p.log_z;
    atom.weight = std::exp(atom.log_weight);
  }
  return p;
}

double BlockEmpirical::frequency(const Word& block) const {
  auto it = frequencies.find(block);
  return it == frequencies.end() ? 0.0 : it->second;
}

BlockEmpirical block_empirical(const PeriodicWord& w, int k) {
  if (k < 1) throw ContractError("block_empirical: k must be >= 1");
  const int n = w.period();
  std::map<Word, int> counts;
  Word block(static_cast<std::size_t>(k));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) block[static_cast<std::size_t>(j)] = w.letters[static_cast<std::size_t>((i + j) % n)];
    ++counts[block];
  }
  BlockEmpirical mu;
  mu.block_length = k;
  for (const auto& [b, c] : counts) mu.frequencies.emplace(b, static_cast<double>(c) / n);
  return mu;
}

double marginal_inconsistency(const BlockEmpirical& mu) {
  if (mu.block_length < 2) return 0.0;
  std::map<Word, double> left;
  std::map<Word, double> right;
  for (const auto& [b, f] : mu.frequencies) {
    left[Word(b.begin(), b.end() - 1)] += f;
    right[Word(b.begin() + 1, b.end())] += f;
  }
  double worst = 0.0;
  for (const auto& [b, f] : left) {
    auto it = right.find(b);
    worst = std::max(worst, std::abs(f - (it == right.end() ? 0.0 : it->second)));
  }
  for (const auto& [b, f] : right) {
    if (!left.contains(b)) worst = std::max(worst, f);
  }
  return worst;
}

// Both divide by the total mass as summed here, so the whole space gets
// probability 1 and rate 0 exactly.
double EmpiricalLaw::probability(const std::function<bool(const BlockEmpirical&)>& event) const {
  CompensatedSum inside;
  CompensatedSum all;
  for (const auto& [mu, weight] : atoms) {
    if (event(mu)) inside.add(weight);
    all.add(weight);
  }
  return inside.value() / all.value();
}

double EmpiricalLaw::log_rate(const std::function<bool(const BlockEmpirical&)>& event) const {
  LogSumExp inside;
  LogSumExp all;
  for (const auto& [mu, weight] : atoms) {
    if (event(mu)) inside.add(std::log(weight));
    all.add(std::log(weight));
  }
  return (inside.value() - all.value()) / n;
}

EmpiricalLaw pushforward_empirical(const PofpMeasure& p, int k) {
  std::map<BlockEmpirical, LogSumExp> merged;
  for (const auto& atom : p.atoms) merged[block_empirical(atom.word, k)].add(atom.log_weight);
  EmpiricalLaw law;
  law.n = p.n;
  law.k = k;
  for (const auto& [mu, acc] : merged) law.atoms.emplace_back(mu, std::exp(acc.value()));
  return law;
}

MarkovMeasure reverse_markov(const MarkovMeasure& q, const Reversal& theta) {
  const ShiftSpace& s = q.space();
  check_compatible(s, theta);
  // Q o theta([x]) = Q([theta x]) with theta acting on finite words exactly as
  // on period words: reverse then permute, or permute only.
  const auto n = static_cast<Eigen::Index>(q.state_count());
  const auto d = static_cast<std::size_t>(q.order());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd pi(n);
  Word image(d);
  Word extended(d + 1);
  Word extended_image(d + 1);
  for (Eigen::Index u = 0; u < n; ++u) {
    const Word& state = q.states()[static_cast<std::size_t>(u)];
    reverse_word(theta, state, image);
    const double log_state = q.cylinder_log_probability(image);
    pi(u) = std::exp(log_state);
    std::copy(state.begin(), state.end(), extended.begin());
    for (Symbol c = 0; c < s.alphabet_size(); ++c) {
      const auto v = q.successor(static_cast<int>(u), c);
      if (!v) continue;
      extended.back() = c;
      reverse_word(theta, extended, extended_image);
      p(u, *v) = std::exp(q.cylinder_log_probability(extended_image) - log_state);
    }
    p.row(u) /= p.row(u).sum();
  }
  pi /= pi.sum();
  return MarkovMeasure::make(s, q.order(), std::move(p), std::move(pi));
}

double rate_level2(const MarkovMeasure& q, const Potential& g, double p_g) {
  return -mean_potential(q, g) - entropy_rate(q) + p_g;
}

double mean_entropy_production(const MarkovMeasure& q, const Potential& g, const Reversal& theta) {
  return mean_potential(q, g) - mean_potential(reverse_markov(q, theta), g);
}

double weak_gibbs_constants(const MarkovMeasure& q, const Potential& g, double p_g, int n, std::uint64_t cap) {
  const ShiftSpace& s = q.space();
  const auto* additive = g.as_additive();
  if (!additive && !g.as_matrix_product()) {
    throw ContractError("weak_gibbs_constants: explicit sequences have no cylinder values");
  }
  const int d = q.order();
  if (n < d) throw ContractError("weak_gibbs_constants: n must be at least the chain's memory");
  double worst = 0.0;
  for_each_word(s, n, resolve_cap(cap), [&](std::span<const Symbol> u) {
    double log_ratio = 0.0;
    if (additive != nullptr) {
      // Position by position: chain increment minus potential window plus p_G.
      // Keeping the three terms together avoids cancelling two O(n) sums.
      const int r = additive->range();
      int state = -1;
      for (int j = 0; j < n; ++j) {
        double chain = 0.0;
        if (j == d - 1) {
          state = *q.index_of(u.first(static_cast<std::size_t>(d)));
          chain = std::log(q.stationary()(state));
        } else if (j >= d) {
          const int next = *q.successor(state, u[static_cast<std::size_t>(j)]);
          chain = std::log(q.probability(state, next));
          state = next;
        }
        const double window = j >= r - 1
                                  ? additive->value(u.subspan(static_cast<std::size_t>(j - r + 1),
                                                              static_cast<std::size_t>(r)))
                                  : 0.0;
        if (!std::isfinite(chain)) {
          throw NumericalError("weak_gibbs_constants: Q gives zero mass to an admissible cylinder");
        }
        log_ratio += (chain - window) + p_g;
      }
    } else {
      const double log_q = q.cylinder_log_probability(u);
      if (!std::isfinite(log_q)) {
        throw NumericalError("weak_gibbs_constants: Q gives zero mass to an admissible cylinder");
      }
      log_ratio = log_q - (word_sum(g, u) - n * p_g);
    }
    worst = std::max(worst, std::abs(log_ratio));
  });
  return worst / n;
}

}  // namespace thermoforge
