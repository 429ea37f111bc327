#include "thermoforge/markov.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "thermoforge/errors.hpp"
#include "thermoforge/numeric.hpp"

namespace thermoforge {
namespace {

std::vector<int> build_successors(const ShiftSpace& s, const std::vector<Word>& states) {
  std::map<Word, int> index;
  for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], static_cast<int>(i));
  const int l = s.alphabet_size();
  std::vector<int> succ(states.size() * static_cast<std::size_t>(l), -1);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Word& u = states[i];
    for (Symbol c = 0; c < l; ++c) {
      if (!s.allowed(u.back(), c)) continue;
      Word v(u.begin() + 1, u.end());
      v.push_back(c);
      succ[i * static_cast<std::size_t>(l) + static_cast<std::size_t>(c)] = index.at(v);
    }
  }
  return succ;
}

Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& p) {
  const auto n = p.rows();
  Eigen::MatrixXd system = p.transpose() - Eigen::MatrixXd::Identity(n, n);
  system.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = system.fullPivLu().solve(rhs);
  if (!pi.allFinite()) throw NumericalError("stationary vector: singular system (reducible chain?)");
  // A few power steps remove the solver's rounding in the invariance residual.
  for (int it = 0; it < 4; ++it) {
    pi = (pi.transpose() * p).transpose();
    pi /= pi.sum();
  }
  return pi;
}

}  // namespace

std::vector<Word> admissible_words(const ShiftSpace& s, int length) {
  std::vector<Word> out;
  for_each_word(s, length, default_enumeration_cap(),
                [&](std::span<const Symbol> w) { out.emplace_back(w.begin(), w.end()); });
  return out;
}

MarkovMeasure::MarkovMeasure(ShiftSpace space, int order, std::vector<Word> states,
                             Eigen::MatrixXd transition, Eigen::VectorXd stationary)
    : space_(std::move(space)),
      order_(order),
      alphabet_size_(space_.alphabet_size()),
      states_(std::move(states)),
      transition_(std::move(transition)),
      stationary_(std::move(stationary)) {
  successor_ = build_successors(space_, states_);
}

MarkovMeasure MarkovMeasure::make(const ShiftSpace& s, int order, Eigen::MatrixXd transition,
                                  Eigen::VectorXd stationary) {
  if (order < 1) throw InputError("Markov measure: order must be >= 1");
  std::vector<Word> states = admissible_words(s, order);
  const auto n = static_cast<Eigen::Index>(states.size());
  if (transition.rows() != n || transition.cols() != n || stationary.size() != n) {
    throw InputError(fmt::format("Markov measure: expected {} states", n));
  }
  MarkovMeasure q(s, order, std::move(states), std::move(transition), std::move(stationary));
  const int l = s.alphabet_size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = q.transition_(i, j);
      if (v < 0.0 || !std::isfinite(v)) throw InputError("Markov measure: negative or non-finite transition");
      if (v == 0.0) continue;
      bool reachable = false;
      for (Symbol c = 0; c < l && !reachable; ++c) {
        reachable = q.successor(static_cast<int>(i), c) == static_cast<int>(j);
      }
      if (!reachable) {
        throw InputError(fmt::format("Markov measure: mass on a forbidden transition {} -> {}", i, j));
      }
    }
  }
  if ((q.stationary_.array() < 0.0).any()) throw InputError("Markov measure: negative stationary weight");
  if (const double r = q.invariant_residual(); r > kTolerance) {
    throw InputError(fmt::format("Markov measure: invariants violated (residual {:.3e})", r));
  }
  return q;
}

MarkovMeasure MarkovMeasure::from_transition(const ShiftSpace& s, int order, Eigen::MatrixXd transition) {
  Eigen::VectorXd pi = solve_stationary(transition);
  return make(s, order, std::move(transition), std::move(pi));
}

MarkovMeasure MarkovMeasure::bernoulli(const ShiftSpace& s, const std::vector<double>& probabilities) {
  const int l = s.alphabet_size();
  if (static_cast<int>(probabilities.size()) != l) throw InputError("bernoulli: one probability per symbol");
  if (s.nonzero_count() != static_cast<std::size_t>(l * l)) {
    throw ContractError("bernoulli: i.i.d. measures need the full shift");
  }
  Eigen::MatrixXd p(l, l);
  Eigen::VectorXd pi(l);
  for (int a = 0; a < l; ++a) {
    pi(a) = probabilities[static_cast<std::size_t>(a)];
    for (int b = 0; b < l; ++b) p(a, b) = probabilities[static_cast<std::size_t>(b)];
  }
  return make(s, 1, std::move(p), std::move(pi));
}

std::optional<int> MarkovMeasure::index_of(std::span<const Symbol> word) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), word,
                             [](const Word& a, std::span<const Symbol> b) {
                               return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                             });
  if (it == states_.end() || !std::equal(it->begin(), it->end(), word.begin(), word.end())) return std::nullopt;
  return static_cast<int>(it - states_.begin());
}

std::optional<int> MarkovMeasure::successor(int state, Symbol symbol) const {
  const int v = successor_[static_cast<std::size_t>(state) * static_cast<std::size_t>(alphabet_size_) +
                           static_cast<std::size_t>(symbol)];
  if (v < 0) return std::nullopt;
  return v;
}

double MarkovMeasure::cylinder_log_probability(std::span<const Symbol> word) const {
  if (!is_linear_admissible(space_, word)) return kNegInf;
  const auto d = static_cast<std::size_t>(order_);
  if (word.size() < d) {
    LogSumExp acc;
    for (std::size_t i = 0; i < states_.size(); ++i) {
      if (std::equal(word.begin(), word.end(), states_[i].begin())) {
        acc.add(std::log(stationary_(static_cast<Eigen::Index>(i))));
      }
    }
    return acc.value();
  }
  int state = *index_of(word.first(d));
  double logp = std::log(stationary_(state));
  for (std::size_t j = d; j < word.size(); ++j) {
    const int next = *successor(state, word[j]);
    logp += std::log(transition_(state, next));
    state = next;
  }
  return logp;
}

double MarkovMeasure::invariant_residual() const {
  double r = std::abs(stationary_.sum() - 1.0);
  r = std::max(r, (transition_.rowwise().sum().array() - 1.0).abs().maxCoeff());
  r = std::max(r, ((stationary_.transpose() * transition_).transpose() - stationary_).cwiseAbs().maxCoeff());
  return r;
}

MarkovMeasure refine(const MarkovMeasure& q, int order) {
  if (order < q.order()) throw ContractError("refine: cannot lower the memory of a chain");
  if (order == q.order()) return q;
  const ShiftSpace& s = q.space();
  std::vector<Word> states = admissible_words(s, order);
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd pi(n);
  const auto d = static_cast<std::size_t>(q.order());
  std::map<Word, int> index;
  for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], static_cast<int>(i));
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Word& w = states[i];
    pi(static_cast<Eigen::Index>(i)) = std::exp(q.cylinder_log_probability(w));
    const int from = *q.index_of(std::span<const Symbol>(w).last(d));
    for (Symbol c = 0; c < s.alphabet_size(); ++c) {
      const auto to = q.successor(from, c);
      if (!to) continue;
      Word v(w.begin() + 1, w.end());
      v.push_back(c);
      p(static_cast<Eigen::Index>(i), index.at(v)) = q.probability(from, *to);
    }
  }
  return MarkovMeasure::make(s, order, std::move(p), std::move(pi));
}

double entropy_rate(const MarkovMeasure& q) {
  CompensatedSum h;
  const auto& p = q.transition();
  for (Eigen::Index u = 0; u < p.rows(); ++u) {
    CompensatedSum row;
    for (Eigen::Index v = 0; v < p.cols(); ++v) row.add(xlogx(p(u, v)));
    h.add(q.stationary()(u) * row.value());
  }
  return -h.value();
}

double mean_potential(const MarkovMeasure& q, const Potential& g) {
  const auto* a = g.as_additive();
  if (!a) throw ContractError("mean_potential: locally constant potential required");
  if (q.order() + 1 < a->range()) return mean_potential(refine(q, a->range() - 1), g);
  const auto r = static_cast<std::size_t>(a->range());
  CompensatedSum total;
  Word path(static_cast<std::size_t>(q.order()) + 1);
  for (int u = 0; u < q.state_count(); ++u) {
    const Word& state = q.states()[static_cast<std::size_t>(u)];
    std::copy(state.begin(), state.end(), path.begin());
    for (Symbol c = 0; c < q.alphabet_size(); ++c) {
      const auto v = q.successor(u, c);
      if (!v) continue;
      const double weight = q.stationary()(u) * q.probability(u, *v);
      if (weight == 0.0) continue;
      path.back() = c;
      total.add(weight * a->value(std::span<const Symbol>(path).first(r)));
    }
  }
  return total.value();
}

MarkovMeasure random_markov(const ShiftSpace& s, int order, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  const std::vector<Word> states = admissible_words(s, order);
  const auto n = static_cast<Eigen::Index>(states.size());
  std::map<Word, int> index;
  for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], static_cast<int>(i));
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (Symbol c = 0; c < s.alphabet_size(); ++c) {
      if (!s.allowed(states[i].back(), c)) continue;
      Word v(states[i].begin() + 1, states[i].end());
      v.push_back(c);
      p(static_cast<Eigen::Index>(i), index.at(v)) = weight(rng);
    }
    p.row(static_cast<Eigen::Index>(i)) /= p.row(static_cast<Eigen::Index>(i)).sum();
  }
  return MarkovMeasure::from_transition(s, order, std::move(p));
}

nlohmann::json to_json(const MarkovMeasure& q) {
  nlohmann::json j;
  j["order"] = q.order();
  j["states"] = q.states();
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < q.transition().rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(q.transition().cols()));
    for (Eigen::Index k = 0; k < q.transition().cols(); ++k) row[static_cast<std::size_t>(k)] = q.transition()(i, k);
    rows.push_back(row);
  }
  j["transition"] = rows;
  j["stationary"] = std::vector<double>(q.stationary().data(), q.stationary().data() + q.stationary().size());
  return j;
}

}  // namespace thermoforge
