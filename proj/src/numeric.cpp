#include "thermoforge/numeric.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <algorithm>
#include <thread>

#include "thermoforge/errors.hpp"

namespace thermoforge {

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) {
    throw InputError("uniform_grid: need step > 0 and hi >= lo");
  }
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

std::uint64_t default_enumeration_cap() {
  constexpr std::uint64_t kDefault = std::uint64_t{1} << 24;
  const char* env = std::getenv("THERMOFORGE_CAP");
  if (env == nullptr || *env == '\0') return kDefault;
  std::uint64_t value = 0;
  const char* end = env + std::strlen(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end || value == 0) {
    throw InputError(std::string("THERMOFORGE_CAP is not a positive integer: ") + env);
  }
  return value;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  const std::size_t used = std::min(workers, count);
  for (std::size_t t = 0; t < used; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < count; i += used) {
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace thermoforge
