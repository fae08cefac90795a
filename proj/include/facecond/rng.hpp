#pragma once

#include <cstdint>
#include <limits>

namespace facecond {

// Counter-based generator: output n is a pure function of (key, n), so a
// stream can be split into independent children without shared state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed);

  // Independent child stream identified by `tag`.
  CounterRng split(std::uint64_t tag) const;

  result_type operator()();
  double uniform();  // [0, 1), 53 bits
  double uniform(double lo, double hi);
  double normal();  // Box-Muller, consumes two draws
  std::uint64_t below(std::uint64_t n);  // uniform in [0, n)

  std::uint64_t key() const { return key_; }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

 private:
  CounterRng(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace facecond
