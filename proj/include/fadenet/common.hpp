#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fadenet {

// Set-valued machinery (chi, Aumann intervals, inflated boxes) is only
// defined for eps in [0, 1/5]; b(eps) is monotone there.
inline constexpr double kEpsCap = 0.2;

class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

[[noreturn]] inline void fail(const std::string& msg) { throw invalid_input(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

// Ratio of two grid quantities that must be integral (window/step, horizon/step).
inline std::size_t checked_ratio(double numerator, double denominator, const char* what) {
  require(denominator > 0.0, std::string(what) + ": nonpositive step");
  const double q = numerator / denominator;
  const double r = std::round(q);
  require(r >= 0.0 && std::abs(q - r) <= 1e-9 * std::max(1.0, std::abs(q)),
          std::string(what) + ": not an integer multiple of the step");
  return static_cast<std::size_t>(r);
}

// Deterministic RNG. mt19937_64 output is fixed by the standard and the
// [0,1) mapping avoids the implementation-defined distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // splitmix64 step, used to derive independent stream seeds
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

// Runs body(0..count-1); results must be written to disjoint slots so the
// outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(threads, count));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace fadenet
