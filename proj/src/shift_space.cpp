#include "thermoforge/shift_space.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "thermoforge/errors.hpp"
#include "thermoforge/numeric.hpp"

namespace thermoforge {
namespace {

using BoolMatrix = std::vector<std::uint8_t>;

BoolMatrix bool_multiply(const BoolMatrix& x, const BoolMatrix& y, int n) {
  BoolMatrix z(x.size(), 0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (!x[static_cast<std::size_t>(i * n + k)]) continue;
      for (int j = 0; j < n; ++j) {
        z[static_cast<std::size_t>(i * n + j)] |= y[static_cast<std::size_t>(k * n + j)];
      }
    }
  }
  return z;
}

bool all_positive(const BoolMatrix& x) {
  return std::all_of(x.begin(), x.end(), [](std::uint8_t v) { return v != 0; });
}

// Smallest m <= cap with A^m > 0. Positivity is monotone in m once reached
// (A has no zero column), so square up to a bracketing power of two and
// binary-search inside it by composing the stored squares.
std::optional<int> find_primitivity_power(const BoolMatrix& a, int n, int cap) {
  std::vector<BoolMatrix> squares{a};  // squares[j] = A^(2^j)
  int exponent = 1;
  while (!all_positive(squares.back())) {
    if (exponent >= cap) return std::nullopt;
    squares.push_back(bool_multiply(squares.back(), squares.back(), n));
    exponent *= 2;
  }
  if (exponent == 1) return 1;
  // Known: A^(exponent/2) not positive, A^exponent positive.
  int lo = exponent / 2;
  BoolMatrix lo_power = squares[squares.size() - 2];
  for (int j = static_cast<int>(squares.size()) - 3; j >= 0; --j) {
    BoolMatrix candidate = bool_multiply(lo_power, squares[static_cast<std::size_t>(j)], n);
    if (!all_positive(candidate)) {
      lo_power = std::move(candidate);
      lo += 1 << j;
    }
  }
  const int m = lo + 1;
  if (m > cap) return std::nullopt;
  return m;
}

Count checked_mul(Count x, Count y) {
  Count r = 0;
  if (__builtin_mul_overflow(x, y, &r)) {
    throw ResourceError("count_periodic: 128-bit overflow in integer matrix power");
  }
  return r;
}

Count checked_add(Count x, Count y) {
  Count r = 0;
  if (__builtin_add_overflow(x, y, &r)) {
    throw ResourceError("count_periodic: 128-bit overflow in integer matrix power");
  }
  return r;
}

using CountMatrix = std::vector<Count>;

CountMatrix count_multiply(const CountMatrix& x, const CountMatrix& y, int n) {
  CountMatrix z(x.size(), 0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Count xik = x[static_cast<std::size_t>(i * n + k)];
      if (xik == 0) continue;
      for (int j = 0; j < n; ++j) {
        auto& zij = z[static_cast<std::size_t>(i * n + j)];
        zij = checked_add(zij, checked_mul(xik, y[static_cast<std::size_t>(k * n + j)]));
      }
    }
  }
  return z;
}

CountMatrix count_power(const ShiftSpace& s, int exponent) {
  const int n = s.alphabet_size();
  CountMatrix result(static_cast<std::size_t>(n * n), 0);
  for (int i = 0; i < n; ++i) result[static_cast<std::size_t>(i * n + i)] = 1;
  CountMatrix base(static_cast<std::size_t>(n * n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) base[static_cast<std::size_t>(i * n + j)] = s.allowed(i, j) ? 1 : 0;
  }
  while (exponent > 0) {
    if (exponent & 1) result = count_multiply(result, base, n);
    exponent >>= 1;
    if (exponent > 0) base = count_multiply(base, base, n);
  }
  return result;
}

// Depth-first lexicographic enumeration. `closing` adds the cyclic check
// between the last and first letters.
void enumerate(const ShiftSpace& s, int length, bool closing,
               const std::function<void(std::span<const Symbol>)>& visit) {
  const int l = s.alphabet_size();
  Word word(static_cast<std::size_t>(length), 0);
  std::vector<Symbol> next(static_cast<std::size_t>(length), 0);
  int pos = 0;
  while (pos >= 0) {
    auto& candidate = next[static_cast<std::size_t>(pos)];
    bool placed = false;
    while (candidate < l) {
      const Symbol c = candidate++;
      if (pos > 0 && !s.allowed(word[static_cast<std::size_t>(pos - 1)], c)) continue;
      if (closing && pos == length - 1 && !s.allowed(c, pos == 0 ? c : word[0])) continue;
      word[static_cast<std::size_t>(pos)] = c;
      placed = true;
      break;
    }
    if (!placed) {
      candidate = 0;
      --pos;
      continue;
    }
    if (pos == length - 1) {
      visit(word);
    } else {
      ++pos;
    }
  }
}

}  // namespace

ShiftSpace ShiftSpace::make(int alphabet_size, const std::vector<std::vector<int>>& transitions,
                            int primitivity_cap) {
  if (alphabet_size <= 0) throw InputError("shift space: alphabet size must be positive");
  if (static_cast<int>(transitions.size()) != alphabet_size) {
    throw InputError(fmt::format("shift space: expected {} rows, got {}", alphabet_size,
                                 transitions.size()));
  }
  const auto l = static_cast<std::size_t>(alphabet_size);
  std::vector<std::uint8_t> a(l * l, 0);
  for (std::size_t i = 0; i < l; ++i) {
    if (transitions[i].size() != l) {
      throw InputError(fmt::format("shift space: row {} has {} entries, expected {}", i,
                                   transitions[i].size(), l));
    }
    for (std::size_t j = 0; j < l; ++j) {
      const int v = transitions[i][j];
      if (v != 0 && v != 1) {
        throw InputError(fmt::format("shift space: entry ({}, {}) = {} is not 0/1", i, j, v));
      }
      a[i * l + j] = static_cast<std::uint8_t>(v);
    }
  }
  for (std::size_t i = 0; i < l; ++i) {
    bool row = false;
    bool col = false;
    for (std::size_t j = 0; j < l; ++j) {
      row = row || a[i * l + j] != 0;
      col = col || a[j * l + i] != 0;
    }
    if (!row) throw InputError(fmt::format("shift space: row {} is all zero", i));
    if (!col) throw InputError(fmt::format("shift space: column {} is all zero", i));
  }
  ShiftSpace s(alphabet_size, std::move(a));
  const int cap = primitivity_cap > 0 ? primitivity_cap : 2 * alphabet_size * alphabet_size;
  s.primitivity_ = find_primitivity_power(s.a_, alphabet_size, cap);
  return s;
}

ShiftSpace ShiftSpace::full_shift(int alphabet_size) {
  const auto l = static_cast<std::size_t>(alphabet_size);
  return make(alphabet_size, std::vector<std::vector<int>>(l, std::vector<int>(l, 1)));
}

ShiftSpace ShiftSpace::golden_mean() { return make(2, {{1, 1}, {1, 0}}); }

std::vector<std::vector<int>> ShiftSpace::matrix() const {
  std::vector<std::vector<int>> m(static_cast<std::size_t>(size_),
                                  std::vector<int>(static_cast<std::size_t>(size_)));
  for (int i = 0; i < size_; ++i) {
    for (int j = 0; j < size_; ++j) {
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = allowed(i, j) ? 1 : 0;
    }
  }
  return m;
}

std::size_t ShiftSpace::nonzero_count() const {
  return static_cast<std::size_t>(std::count(a_.begin(), a_.end(), std::uint8_t{1}));
}

bool is_linear_admissible(const ShiftSpace& s, std::span<const Symbol> word) {
  for (Symbol c : word) {
    if (c < 0 || c >= s.alphabet_size()) return false;
  }
  for (std::size_t j = 0; j + 1 < word.size(); ++j) {
    if (!s.allowed(word[j], word[j + 1])) return false;
  }
  return true;
}

bool is_cyclic_admissible(const ShiftSpace& s, std::span<const Symbol> word) {
  if (word.empty() || !is_linear_admissible(s, word)) return false;
  return s.allowed(word.back(), word.front());
}

void check_enumeration_cap(const ShiftSpace& s, int length, std::uint64_t cap, const char* what) {
  if (length < 1) throw ContractError(fmt::format("{}: length must be >= 1, got {}", what, length));
  long double total = 1.0L;
  for (int i = 0; i < length; ++i) total *= static_cast<long double>(s.alphabet_size());
  if (total > static_cast<long double>(cap)) {
    throw ResourceError(fmt::format("{}: {}^{} words exceed the enumeration cap {}", what,
                                    s.alphabet_size(), length, cap));
  }
}

void for_each_periodic(const ShiftSpace& s, int n, std::uint64_t cap,
                       const std::function<void(std::span<const Symbol>)>& visit) {
  check_enumeration_cap(s, n, cap, "periodic_points");
  enumerate(s, n, true, visit);
}

void for_each_word(const ShiftSpace& s, int length, std::uint64_t cap,
                   const std::function<void(std::span<const Symbol>)>& visit) {
  check_enumeration_cap(s, length, cap, "admissible words");
  enumerate(s, length, false, visit);
}

std::vector<PeriodicWord> periodic_points(const ShiftSpace& s, int n, std::uint64_t cap) {
  std::vector<PeriodicWord> out;
  for_each_periodic(s, n, cap, [&](std::span<const Symbol> w) {
    out.push_back(PeriodicWord{Word(w.begin(), w.end())});
  });
  return out;
}

std::vector<PeriodicWord> periodic_points(const ShiftSpace& s, int n) {
  return periodic_points(s, n, default_enumeration_cap());
}

Count count_periodic(const ShiftSpace& s, int n) {
  if (n < 1) throw ContractError("count_periodic: n must be >= 1");
  const CountMatrix p = count_power(s, n);
  Count trace = 0;
  const int l = s.alphabet_size();
  for (int i = 0; i < l; ++i) trace = checked_add(trace, p[static_cast<std::size_t>(i * l + i)]);
  return trace;
}

Count count_words(const ShiftSpace& s, int length) {
  if (length < 1) throw ContractError("count_words: length must be >= 1");
  const CountMatrix p = count_power(s, length - 1);
  Count total = 0;
  for (Count v : p) total = checked_add(total, v);
  return total;
}

std::string to_string(Count value) {
  if (value == 0) return "0";
  std::string digits;
  while (value > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

PeriodicWord rotate(const PeriodicWord& w, int shift) {
  const int n = w.period();
  PeriodicWord out{Word(w.letters.size())};
  for (int j = 0; j < n; ++j) {
    out.letters[static_cast<std::size_t>(j)] =
        w.letters[static_cast<std::size_t>(((j + shift) % n + n) % n)];
  }
  return out;
}

Reversal Reversal::time_reversal(std::vector<Symbol> perm) {
  return Reversal{ReversalKind::kTimeReversal, std::move(perm)};
}

Reversal Reversal::commutation(std::vector<Symbol> perm) {
  return Reversal{ReversalKind::kCommutation, std::move(perm)};
}

Reversal Reversal::identity_time_reversal(int alphabet_size) {
  std::vector<Symbol> perm(static_cast<std::size_t>(alphabet_size));
  for (int i = 0; i < alphabet_size; ++i) perm[static_cast<std::size_t>(i)] = i;
  return time_reversal(std::move(perm));
}

std::string compatibility_problem(const ShiftSpace& s, const Reversal& theta) {
  const int l = s.alphabet_size();
  if (static_cast<int>(theta.perm.size()) != l) {
    return fmt::format("reversal permutation has {} entries, alphabet has {}", theta.perm.size(), l);
  }
  for (int a = 0; a < l; ++a) {
    const Symbol pa = theta.perm[static_cast<std::size_t>(a)];
    if (pa < 0 || pa >= l) return fmt::format("reversal maps {} outside the alphabet", a);
    if (theta.perm[static_cast<std::size_t>(pa)] != a) {
      return fmt::format("reversal permutation is not an involution at symbol {}", a);
    }
  }
  for (int a = 0; a < l; ++a) {
    for (int b = 0; b < l; ++b) {
      const Symbol pa = theta.perm[static_cast<std::size_t>(a)];
      const Symbol pb = theta.perm[static_cast<std::size_t>(b)];
      if (theta.kind == ReversalKind::kTimeReversal) {
        if (s.allowed(pb, pa) != s.allowed(a, b)) {
          return fmt::format(
              "time-reversal admissibility check A[p(b)][p(a)] == A[a][b] fails at a={}, b={}", a, b);
        }
      } else if (s.allowed(pa, pb) != s.allowed(a, b)) {
        return fmt::format(
            "commutation admissibility check A[p(a)][p(b)] == A[a][b] fails at a={}, b={}", a, b);
      }
    }
  }
  return {};
}

void check_compatible(const ShiftSpace& s, const Reversal& theta) {
  if (auto problem = compatibility_problem(s, theta); !problem.empty()) {
    throw ContractError("incompatible reversal: " + problem);
  }
}

void reverse_word(const Reversal& theta, std::span<const Symbol> word, std::span<Symbol> out) {
  const std::size_t n = word.size();
  if (theta.kind == ReversalKind::kTimeReversal) {
    for (std::size_t j = 0; j < n; ++j) {
      out[j] = theta.perm[static_cast<std::size_t>(word[n - 1 - j])];
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) out[j] = theta.perm[static_cast<std::size_t>(word[j])];
  }
}

PeriodicWord apply_reversal(const ShiftSpace& s, const Reversal& theta, const PeriodicWord& w) {
  check_compatible(s, theta);
  if (!is_cyclic_admissible(s, w.letters)) {
    throw ContractError("apply_reversal: word is not cyclically admissible");
  }
  PeriodicWord out{Word(w.letters.size())};
  reverse_word(theta, w.letters, out.letters);
  return out;
}

ProductSystem product_system(const ShiftSpace& s1, const ShiftSpace& s2) {
  if (!(s1 == s2)) {
    throw ContractError("product_system: the swap reversal requires identical factors");
  }
  const int l = s1.alphabet_size();
  const int size = l * l;
  std::vector<std::vector<int>> a(static_cast<std::size_t>(size),
                                  std::vector<int>(static_cast<std::size_t>(size), 0));
  std::vector<Symbol> swap(static_cast<std::size_t>(size));
  for (int a1 = 0; a1 < l; ++a1) {
    for (int b1 = 0; b1 < l; ++b1) {
      const int from = a1 * l + b1;
      swap[static_cast<std::size_t>(from)] = b1 * l + a1;
      for (int a2 = 0; a2 < l; ++a2) {
        for (int b2 = 0; b2 < l; ++b2) {
          a[static_cast<std::size_t>(from)][static_cast<std::size_t>(a2 * l + b2)] =
              (s1.allowed(a1, a2) && s2.allowed(b1, b2)) ? 1 : 0;
        }
      }
    }
  }
  return ProductSystem{ShiftSpace::make(size, a), Reversal::commutation(std::move(swap)), l};
}

}  // namespace thermoforge
