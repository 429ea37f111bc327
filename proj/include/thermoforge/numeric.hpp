#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace thermoforge {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Streaming log(sum exp(x_i)). Keeps a running maximum and a compensated
// sum of exp(x_i - max), rescaling when the maximum moves.
class LogSumExp {
 public:
  void add(double x) {
    if (x == kNegInf) return;
    if (x > max_) {
      if (max_ != kNegInf) {
        const double scale = std::exp(max_ - x);
        sum_ *= scale;
        comp_ *= scale;
      }
      max_ = x;
    }
    accumulate(std::exp(x - max_));
  }
  // Adds log(w) + x without forming w * exp(x).
  void add_weighted(double log_weight, double x) { add(log_weight + x); }

  double value() const {
    if (max_ == kNegInf) return kNegInf;
    return max_ + std::log(sum_ + comp_);
  }
  bool empty() const { return max_ == kNegInf; }

 private:
  void accumulate(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double max_ = kNegInf;
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
  LogSumExp acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

// 0 log 0 := 0.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Inclusive uniform grid lo, lo+step, ..., hi. Points are computed as
// lo + i*step so that symmetric grids stay symmetric up to rounding.
std::vector<double> uniform_grid(double lo, double hi, double step);

// Enumeration cap: THERMOFORGE_CAP if set, else 2^24.
std::uint64_t default_enumeration_cap();

// Runs body(0..count-1) on up to `threads` workers. Each index is handled by
// exactly one call, so results stored per index do not depend on scheduling.
// The exception from the lowest failing index is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace thermoforge
