#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace thermoforge {

using Symbol = int;
using Word = std::vector<Symbol>;

/// Two-sided subshift of finite type on the alphabet {0, ..., l-1}.
///
/// The transition matrix A has A(a, b) = 1 when b may follow a. Every symbol
/// must have at least one successor and one predecessor. Non-primitive
/// matrices are accepted; `primitivity_power()` is then empty and callers
/// that need (WPS)-type mixing should check `is_primitive()`.
class ShiftSpace {
 public:
  /// Validates the matrix and computes the primitivity power by boolean
  /// squaring. `primitivity_cap` <= 0 selects the default 2 l^2.
  static ShiftSpace make(int alphabet_size,
                         const std::vector<std::vector<int>>& transitions,
                         int primitivity_cap = 0);

  static ShiftSpace full_shift(int alphabet_size);
  static ShiftSpace golden_mean();

  int alphabet_size() const { return size_; }
  bool allowed(Symbol a, Symbol b) const {
    return a_[static_cast<std::size_t>(a * size_ + b)] != 0;
  }
  const std::optional<int>& primitivity_power() const { return primitivity_; }
  bool is_primitive() const { return primitivity_.has_value(); }

  std::vector<std::vector<int>> matrix() const;
  std::size_t nonzero_count() const;

  friend bool operator==(const ShiftSpace& lhs, const ShiftSpace& rhs) {
    return lhs.size_ == rhs.size_ && lhs.a_ == rhs.a_;
  }

 private:
  ShiftSpace(int size, std::vector<std::uint8_t> a) : size_(size), a_(std::move(a)) {}

  int size_ = 0;
  std::vector<std::uint8_t> a_;
  std::optional<int> primitivity_;
};

/// The n-periodic point x with x_j = letters[j mod n].
struct PeriodicWord {
  Word letters;

  int period() const { return static_cast<int>(letters.size()); }
  friend auto operator<=>(const PeriodicWord&, const PeriodicWord&) = default;
};

bool is_linear_admissible(const ShiftSpace& s, std::span<const Symbol> word);
bool is_cyclic_admissible(const ShiftSpace& s, std::span<const Symbol> word);

/// Throws ResourceError when alphabet_size^length exceeds `cap`.
void check_enumeration_cap(const ShiftSpace& s, int length, std::uint64_t cap,
                           const char* what);

/// Visits every cyclically admissible word of length n in lexicographic order.
void for_each_periodic(const ShiftSpace& s, int n, std::uint64_t cap,
                       const std::function<void(std::span<const Symbol>)>& visit);

/// Visits every admissible (linear) word of the given length in
/// lexicographic order.
void for_each_word(const ShiftSpace& s, int length, std::uint64_t cap,
                   const std::function<void(std::span<const Symbol>)>& visit);

std::vector<PeriodicWord> periodic_points(const ShiftSpace& s, int n, std::uint64_t cap);
std::vector<PeriodicWord> periodic_points(const ShiftSpace& s, int n);

using Count = unsigned __int128;

/// trace(A^n) with exact 128-bit arithmetic; throws ResourceError on overflow.
Count count_periodic(const ShiftSpace& s, int n);
/// Number of admissible words of the given length (sum of entries of A^(length-1)).
Count count_words(const ShiftSpace& s, int length);
std::string to_string(Count value);

PeriodicWord rotate(const PeriodicWord& w, int shift);

enum class ReversalKind { kTimeReversal, kCommutation };

/// Involutive reversal built from a symbol permutation.
///
/// kTimeReversal: theta(x)_j = p(x_{-j}); on M_n this acts through
/// theta o phi^(n-1), i.e. reverse the period word then permute.
/// kCommutation: theta(x)_j = p(x_j), commuting with the shift.
struct Reversal {
  ReversalKind kind = ReversalKind::kTimeReversal;
  std::vector<Symbol> perm;

  static Reversal time_reversal(std::vector<Symbol> perm);
  static Reversal commutation(std::vector<Symbol> perm);
  static Reversal identity_time_reversal(int alphabet_size);
};

/// Empty string when compatible, otherwise a description of the failed check.
std::string compatibility_problem(const ShiftSpace& s, const Reversal& theta);
/// Throws ContractError naming the failed admissibility check.
void check_compatible(const ShiftSpace& s, const Reversal& theta);

/// Writes theta_n(word) into `out` (same length, no aliasing).
void reverse_word(const Reversal& theta, std::span<const Symbol> word, std::span<Symbol> out);

PeriodicWord apply_reversal(const ShiftSpace& s, const Reversal& theta, const PeriodicWord& w);

struct ProductSystem {
  ShiftSpace space;
  Reversal swap;
  int factor_size = 0;

  Symbol pair(Symbol a, Symbol b) const { return a * factor_size + b; }
};

/// M = X x X with the component swap as a commutation reversal.
ProductSystem product_system(const ShiftSpace& s1, const ShiftSpace& s2);

}  // namespace thermoforge
