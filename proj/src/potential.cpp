#include "thermoforge/potential.hpp"

#include <algorithm>
#include <cassert>
#include <climits>
#include <cmath>
#include <fmt/format.h>

#include "thermoforge/errors.hpp"
#include "thermoforge/numeric.hpp"

namespace thermoforge {
namespace {

std::uint64_t resolve_cap(std::uint64_t cap) { return cap == 0 ? default_enumeration_cap() : cap; }

std::size_t table_size_for(int alphabet_size, int range) {
  long double total = 1.0L;
  for (int i = 0; i < range; ++i) total *= static_cast<long double>(alphabet_size);
  if (total > static_cast<long double>(default_enumeration_cap())) {
    throw ResourceError(fmt::format("additive potential: table of {}^{} entries exceeds the cap",
                                    alphabet_size, range));
  }
  return static_cast<std::size_t>(total);
}

double matrix_norm(const Eigen::MatrixXd& m, MatrixNorm norm) {
  switch (norm) {
    case MatrixNorm::kInfinity:
      return m.cwiseAbs().rowwise().sum().maxCoeff();
    case MatrixNorm::kOne:
      return m.cwiseAbs().colwise().sum().maxCoeff();
    case MatrixNorm::kFrobenius:
      return m.norm();
  }
  return 0.0;
}

MatrixNorm dual_norm(MatrixNorm norm) {
  switch (norm) {
    case MatrixNorm::kInfinity:
      return MatrixNorm::kOne;
    case MatrixNorm::kOne:
      return MatrixNorm::kInfinity;
    case MatrixNorm::kFrobenius:
      return MatrixNorm::kFrobenius;
  }
  return norm;
}

// Periodic representative of theta_n x for the point spelled by `period`.
Word reversed_period(const Reversal& theta, int n, std::span<const Symbol> period) {
  const auto p = static_cast<int>(period.size());
  Word out(period.size());
  for (int j = 0; j < p; ++j) {
    const int src = theta.kind == ReversalKind::kTimeReversal ? (((n - 1 - j) % p) + p) % p : j;
    out[static_cast<std::size_t>(j)] = theta.perm[static_cast<std::size_t>(period[static_cast<std::size_t>(src)])];
  }
  return out;
}

// Summed in window-code order, so words with the same multiset of windows
// (a word and its reversal, say) get bit-identical sums.
double additive_cyclic_sum(const AdditiveLocal& g, int n, std::span<const Symbol> period) {
  const auto p = period.size();
  const int r = g.range();
  Word window(static_cast<std::size_t>(r));
  thread_local std::vector<std::size_t> codes;
  codes.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < r; ++i) {
      window[static_cast<std::size_t>(i)] = period[static_cast<std::size_t>(j + i) % p];
    }
    const std::size_t c = g.code(window);
    assert(g.defined_at(c));
    codes[static_cast<std::size_t>(j)] = c;
  }
  std::sort(codes.begin(), codes.end());
  double total = 0.0;
  for (std::size_t c : codes) total += g.value_at(c);
  return total;
}

// Sum of complete windows of a linear word.
double additive_linear_sum(const AdditiveLocal& g, std::span<const Symbol> word) {
  const auto r = static_cast<std::size_t>(g.range());
  double total = 0.0;
  for (std::size_t j = 0; j + r <= word.size(); ++j) total += g.value(word.subspan(j, r));
  return total;
}

AdditiveLocal lift_to_range(const ShiftSpace& s, const AdditiveLocal& g, int range) {
  const std::size_t size = table_size_for(s.alphabet_size(), range);
  std::vector<double> table(size, 0.0);
  std::vector<std::uint8_t> defined(size, 0);
  const auto r = static_cast<std::size_t>(g.range());
  for_each_word(s, range, default_enumeration_cap(), [&](std::span<const Symbol> u) {
    std::size_t code = 0;
    for (Symbol c : u) code = code * static_cast<std::size_t>(s.alphabet_size()) + static_cast<std::size_t>(c);
    table[code] = g.value(u.first(r));
    defined[code] = 1;
  });
  return AdditiveLocal(s.alphabet_size(), range, std::move(table), std::move(defined));
}

// Visits every admissible continuation of `prefix` by `extra` letters.
void for_each_extension(const ShiftSpace& s, Word& buffer, std::size_t prefix_len, int extra,
                        const std::function<void(std::span<const Symbol>)>& visit) {
  if (extra == 0) {
    visit(std::span<const Symbol>(buffer.data(), prefix_len));
    return;
  }
  for (Symbol c = 0; c < s.alphabet_size(); ++c) {
    if (prefix_len > 0 && !s.allowed(buffer[prefix_len - 1], c)) continue;
    buffer[prefix_len] = c;
    for_each_extension(s, buffer, prefix_len + 1, extra - 1, visit);
  }
}

}  // namespace

AdditiveLocal::AdditiveLocal(int alphabet_size, int range, std::vector<double> table,
                             std::vector<std::uint8_t> defined)
    : alphabet_size_(alphabet_size),
      range_(range),
      table_(std::move(table)),
      defined_(std::move(defined)) {}

std::size_t AdditiveLocal::code(std::span<const Symbol> window) const {
  assert(static_cast<int>(window.size()) == range_);
  std::size_t c = 0;
  for (Symbol s : window) c = c * static_cast<std::size_t>(alphabet_size_) + static_cast<std::size_t>(s);
  return c;
}

double AdditiveLocal::value(std::span<const Symbol> window) const {
  const std::size_t c = code(window);
  if (!defined_[c]) {
    throw ContractError("additive potential evaluated on an inadmissible window");
  }
  return table_[c];
}

double AdditiveLocal::sup_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (defined_[i]) m = std::max(m, std::abs(table_[i]));
  }
  return m;
}

Potential Potential::additive(const ShiftSpace& s, int range,
                              const std::function<double(std::span<const Symbol>)>& table) {
  if (range < 1) throw InputError("additive potential: range must be >= 1");
  const std::size_t size = table_size_for(s.alphabet_size(), range);
  std::vector<double> values(size, 0.0);
  std::vector<std::uint8_t> defined(size, 0);
  AdditiveLocal probe(s.alphabet_size(), range, {}, {});
  for_each_word(s, range, default_enumeration_cap(), [&](std::span<const Symbol> u) {
    const std::size_t c = probe.code(u);
    const double v = table(u);
    if (!std::isfinite(v)) throw InputError("additive potential: non-finite table value");
    values[c] = v;
    defined[c] = 1;
  });
  return Potential(AdditiveLocal(s.alphabet_size(), range, std::move(values), std::move(defined)));
}

Potential Potential::additive(const ShiftSpace& s, int range, const std::map<Word, double>& table) {
  for (const auto& [word, value] : table) {
    if (static_cast<int>(word.size()) != range) {
      throw InputError(fmt::format("additive potential: word of length {} in a range-{} table",
                                   word.size(), range));
    }
    if (!is_linear_admissible(s, word)) {
      throw InputError("additive potential: table entry on an inadmissible word");
    }
  }
  return additive(s, range, [&](std::span<const Symbol> u) {
    auto it = table.find(Word(u.begin(), u.end()));
    if (it == table.end()) {
      std::string spelled;
      for (Symbol c : u) spelled += fmt::format("{}{}", spelled.empty() ? "" : ",", c);
      throw InputError("additive potential: missing value for admissible word " + spelled);
    }
    return it->second;
  });
}

Potential Potential::letter(const ShiftSpace& s, const std::vector<double>& g) {
  if (static_cast<int>(g.size()) != s.alphabet_size()) {
    throw InputError("letter potential: one value per symbol required");
  }
  return additive(s, 1, [&](std::span<const Symbol> u) { return g[static_cast<std::size_t>(u[0])]; });
}

Potential Potential::zero(const ShiftSpace& s) {
  return additive(s, 1, [](std::span<const Symbol>) { return 0.0; });
}

Potential Potential::matrix_product(const ShiftSpace& s, std::vector<Eigen::MatrixXd> matrices,
                                    MatrixNorm norm) {
  if (static_cast<int>(matrices.size()) != s.alphabet_size()) {
    throw InputError("matrix product potential: one matrix per symbol required");
  }
  const auto dim = matrices.front().rows();
  for (const auto& m : matrices) {
    if (m.rows() != dim || m.cols() != dim || dim == 0) {
      throw InputError("matrix product potential: matrices must be square of equal size");
    }
    if (!(m.array() > 0.0).all() || !m.allFinite()) {
      throw InputError("matrix product potential: entries must be finite and strictly positive");
    }
  }
  return Potential(MatrixProduct{std::move(matrices), norm});
}

Potential Potential::explicit_sequence(int horizon, ExplicitSequence::Evaluator evaluator) {
  if (horizon < 1 || !evaluator) throw InputError("explicit potential: need horizon >= 1 and an evaluator");
  return Potential(ExplicitSequence{horizon, std::move(evaluator)});
}

PotentialKind Potential::kind() const {
  if (as_additive()) return PotentialKind::kAdditive;
  if (as_matrix_product()) return PotentialKind::kMatrixProduct;
  return PotentialKind::kExplicit;
}

int Potential::lookahead() const {
  if (const auto* a = as_additive()) return a->range() - 1;
  if (as_matrix_product()) return 0;
  return -1;
}

double log_norm_of_product(const MatrixProduct& mp, std::span<const Symbol> letters) {
  if (letters.empty()) return std::log(matrix_norm(Eigen::MatrixXd::Identity(mp.dimension(), mp.dimension()), mp.norm));
  Eigen::MatrixXd product = mp.matrices[static_cast<std::size_t>(letters[0])];
  double log_scale = 0.0;
  for (std::size_t j = 1; j < letters.size(); ++j) {
    product = product * mp.matrices[static_cast<std::size_t>(letters[j])];
    const double scale = product.maxCoeff();
    product /= scale;
    log_scale += std::log(scale);
  }
  return log_scale + std::log(matrix_norm(product, mp.norm));
}

double evaluate(const Potential& g, int n, std::span<const Symbol> period) {
  if (n < 1 || period.empty()) throw ContractError("evaluate: need n >= 1 and a nonempty period");
  if (const auto* a = g.as_additive()) return additive_cyclic_sum(*a, n, period);
  if (const auto* mp = g.as_matrix_product()) {
    Word letters(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) letters[static_cast<std::size_t>(j)] = period[static_cast<std::size_t>(j) % period.size()];
    return log_norm_of_product(*mp, letters);
  }
  const auto* e = g.as_explicit();
  if (n > e->horizon) {
    throw ContractError(fmt::format("explicit potential: n = {} beyond horizon {}", n, e->horizon));
  }
  return e->evaluator(n, period);
}

double birkhoff(const Potential& g, const PeriodicWord& w) { return evaluate(g, w.period(), w.letters); }

double word_sum(const Potential& g, std::span<const Symbol> word) {
  if (const auto* a = g.as_additive()) return additive_linear_sum(*a, word);
  if (const auto* mp = g.as_matrix_product()) return log_norm_of_product(*mp, word);
  throw ContractError("word_sum: explicit sequences are only defined on periodic points");
}

double entropy_production(const ShiftSpace& s, const Potential& g, const Reversal& theta,
                          const PeriodicWord& w) {
  const PeriodicWord reversed = apply_reversal(s, theta, w);
  return birkhoff(g, w) - birkhoff(g, reversed);
}

Potential pullback(const ShiftSpace& s, const Potential& g, const Reversal& theta) {
  check_compatible(s, theta);
  if (const auto* a = g.as_additive()) {
    // On a range-r word u, (g o theta)(u) = g(theta(u)); for time reversal this
    // reads coordinates shifted by r-1, which leaves every periodic sum intact.
    Word image(static_cast<std::size_t>(a->range()));
    return Potential::additive(s, a->range(), [&](std::span<const Symbol> u) {
      reverse_word(theta, u, image);
      return a->value(image);
    });
  }
  if (const auto* mp = g.as_matrix_product()) {
    std::vector<Eigen::MatrixXd> pulled(mp->matrices.size());
    for (std::size_t a = 0; a < pulled.size(); ++a) {
      const auto& source = mp->matrices[static_cast<std::size_t>(theta.perm[a])];
      pulled[a] = theta.kind == ReversalKind::kTimeReversal ? Eigen::MatrixXd(source.transpose()) : source;
    }
    const MatrixNorm norm = theta.kind == ReversalKind::kTimeReversal ? dual_norm(mp->norm) : mp->norm;
    return Potential::matrix_product(s, std::move(pulled), norm);
  }
  const ExplicitSequence base = *g.as_explicit();
  return Potential::explicit_sequence(base.horizon, [base, theta](int n, std::span<const Symbol> period) {
    const Word image = reversed_period(theta, n, period);
    return base.evaluator(n, image);
  });
}

Potential linear_combination(const ShiftSpace& s, double a, const Potential& g1, double b,
                             const Potential& g2) {
  const auto* x = g1.as_additive();
  const auto* y = g2.as_additive();
  if (!x || !y) throw ContractError("linear_combination: additive potentials required");
  const int range = std::max(x->range(), y->range());
  const AdditiveLocal lx = x->range() == range ? *x : lift_to_range(s, *x, range);
  const AdditiveLocal ly = y->range() == range ? *y : lift_to_range(s, *y, range);
  return Potential::additive(s, range, [&](std::span<const Symbol> u) {
    return a * lx.value(u) + b * ly.value(u);
  });
}

double TiltedPotential::evaluate(const ShiftSpace& s, const PeriodicWord& w) const {
  const PeriodicWord reversed = apply_reversal(s, reversal, w);
  return (1.0 - alpha) * birkhoff(base, w) + alpha * birkhoff(base, reversed);
}

Potential TiltedPotential::materialize(const ShiftSpace& s) const {
  const Potential pulled = pullback(s, base, reversal);
  if (base.as_additive()) return linear_combination(s, 1.0 - alpha, base, alpha, pulled);
  const Potential g = base;
  const double a = alpha;
  return Potential::explicit_sequence(
      base.as_explicit() ? base.as_explicit()->horizon : INT_MAX,
      [g, pulled, a](int n, std::span<const Symbol> period) {
        return (1.0 - a) * thermoforge::evaluate(g, n, period) + a * thermoforge::evaluate(pulled, n, period);
      });
}

std::vector<CylinderExtremes> cylinder_extremes(const ShiftSpace& s, const Potential& g, int n,
                                                int k, const CylinderOptions& options) {
  if (n < 1 || k < 0) throw ContractError("cylinder_extremes: need n >= 1 and k >= 0");
  const std::uint64_t cap = resolve_cap(options.cap);
  const int length = n + 2 * k;
  std::vector<CylinderExtremes> out;

  if (const auto* e = g.as_explicit()) {
    const int q = s.primitivity_power().value_or(2);
    const int m = options.representative_period > 0 ? options.representative_period
                                                    : length + std::max(2, q);
    if (m <= length) {
      throw ContractError("cylinder_extremes: representative period must exceed n + 2k");
    }
    std::map<Word, std::pair<double, double>> extremes;
    Word window(static_cast<std::size_t>(length));
    for_each_periodic(s, m, cap, [&](std::span<const Symbol> y) {
      for (int i = 0; i < length; ++i) {
        window[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(((i - k) % m + m) % m)];
      }
      const double v = e->evaluator(n, y);
      auto [it, inserted] = extremes.try_emplace(window, v, v);
      if (!inserted) {
        it->second.first = std::min(it->second.first, v);
        it->second.second = std::max(it->second.second, v);
      }
    });
    for_each_word(s, length, cap, [&](std::span<const Symbol> w) {
      auto it = extremes.find(Word(w.begin(), w.end()));
      if (it == extremes.end()) {
        throw NumericalError(fmt::format(
            "cylinder_extremes: a window has no periodic representative of period {}; increase it", m));
      }
      out.push_back(CylinderExtremes{it->first, it->second.first, it->second.second});
    });
    return out;
  }

  const int extra = std::max(0, g.lookahead() - k);
  check_enumeration_cap(s, length + extra, cap, "cylinder_extremes");
  Word buffer(static_cast<std::size_t>(length + extra));
  for_each_word(s, length, cap, [&](std::span<const Symbol> w) {
    std::copy(w.begin(), w.end(), buffer.begin());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for_each_extension(s, buffer, static_cast<std::size_t>(length), extra, [&](std::span<const Symbol> x) {
      // Coordinates 0.. of the point sit at index k of the buffer.
      const auto tail = x.subspan(static_cast<std::size_t>(k),
                                  static_cast<std::size_t>(n + std::max(0, g.lookahead())));
      const double v = word_sum(g, tail);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    });
    out.push_back(CylinderExtremes{Word(w.begin(), w.end()), lo, hi});
  });
  return out;
}

double variation(const ShiftSpace& s, const Potential& g, int n, int k, const CylinderOptions& options) {
  double worst = 0.0;
  for (const auto& c : cylinder_extremes(s, g, n, k, options)) worst = std::max(worst, c.max - c.min);
  return worst / n;
}

double aa_defect(const ShiftSpace& s, const Potential& g, int k, int n, std::uint64_t cap) {
  if (k < 1 || n < 1) throw ContractError("aa_defect: need k >= 1 and n >= 1");
  double worst = 0.0;
  if (const auto* a = g.as_additive()) {
    // k^-1 S_n G_k folds to a weighted sum of the n cyclic windows; each
    // window is counted mult[m] times.
    std::vector<long> mult(static_cast<std::size_t>(n));
    const auto r = static_cast<std::size_t>(a->range());
    Word window(r);
    for_each_periodic(s, n, resolve_cap(cap), [&](std::span<const Symbol> w) {
      std::fill(mult.begin(), mult.end(), 0L);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) ++mult[static_cast<std::size_t>((i + j) % n)];
      }
      double exact = 0.0;
      double approx = 0.0;
      for (int m = 0; m < n; ++m) {
        for (std::size_t t = 0; t < r; ++t) window[t] = w[(static_cast<std::size_t>(m) + t) % w.size()];
        const double gm = a->value(window);
        exact += gm;
        approx += (static_cast<double>(mult[static_cast<std::size_t>(m)]) / k) * gm;
      }
      worst = std::max(worst, std::abs(exact - approx) / n);
    });
    return worst;
  }
  Word rotated(static_cast<std::size_t>(n));
  for_each_periodic(s, n, resolve_cap(cap), [&](std::span<const Symbol> w) {
    const double exact = evaluate(g, n, w);
    double approx = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) rotated[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>((i + j) % n)];
      approx += evaluate(g, k, rotated);
    }
    approx /= k;
    worst = std::max(worst, std::abs(exact - approx) / n);
  });
  return worst;
}

double seminorm_estimate(const ShiftSpace& s, const Potential& g, int n, std::uint64_t cap) {
  double worst = 0.0;
  for_each_periodic(s, n, resolve_cap(cap), [&](std::span<const Symbol> w) {
    worst = std::max(worst, std::abs(evaluate(g, n, w)));
  });
  return worst / n;
}

Potential block_average(const ShiftSpace& s, const Potential& g, int k, std::uint64_t cap) {
  if (k < 1) throw ContractError("block_average: k must be >= 1");
  if (g.lookahead() < 0) throw ContractError("block_average: explicit sequences are not supported");
  const int range = k + g.lookahead();
  check_enumeration_cap(s, range, resolve_cap(cap), "block_average");
  return Potential::additive(s, range, [&](std::span<const Symbol> u) { return word_sum(g, u) / k; });
}

double almost_additivity_constant(const MatrixProduct& mp) {
  // For positive products X = A B with B = M_a B', every row sum of B is at
  // least rho times every other one, hence ||AB||_inf >= rho ||A||_inf ||B||_inf.
  auto ratio_bound = [&](bool by_rows) {
    double rho = 1.0;
    for (const auto& m : mp.matrices) {
      for (Eigen::Index l = 0; l < m.rows(); ++l) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          for (Eigen::Index j = 0; j < m.rows(); ++j) {
            const double v = by_rows ? m(i, l) / m(j, l) : m(l, i) / m(l, j);
            rho = std::min(rho, v);
          }
        }
      }
    }
    return -std::log(rho);
  };
  switch (mp.norm) {
    case MatrixNorm::kInfinity:
      return ratio_bound(true);
    case MatrixNorm::kOne:
      return ratio_bound(false);
    case MatrixNorm::kFrobenius:
      // |log||X||_F - log||X||_inf| <= log(N)/2 for each of the three terms.
      return ratio_bound(true) + 1.5 * std::log(static_cast<double>(mp.dimension()));
  }
  return 0.0;
}

}  // namespace thermoforge
