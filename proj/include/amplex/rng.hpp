#pragma once

#include "amplex/linalg.hpp"

#include <cstdint>

namespace amplex {

// Counter-based generator: every draw is a pure function of
// (seed, stream, counter), so a trial's numbers do not depend on which
// thread ran it or in what order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed, stream)) {}

  std::uint64_t next_u64() { return hash(key_, counter_++); }
  double uniform();           // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  Vec normal_vec(Eigen::Index n, double sigma = 1.0);
  // Uniform in the closed ball of the given radius.
  Vec in_ball(Eigen::Index n, double radius);
  std::uint64_t below(std::uint64_t bound);

  // Child stream keyed by an index, e.g. a trial number.
  CounterRng split(std::uint64_t index) const;

  static std::uint64_t hash(std::uint64_t key, std::uint64_t counter);
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

 private:
  struct Raw {};
  CounterRng(std::uint64_t key, Raw) : key_(key) {}
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Named streams used across the library, so unrelated consumers of one seed
// never share draws.
enum class Stream : std::uint64_t {
  Samples = 1,
  Crossing = 2,
  Jets = 3,
  Template = 4,
  Jiggle = 5,
  Refine = 6,
  Margin = 7,
};

inline CounterRng make_rng(std::uint64_t seed, Stream s) {
  return CounterRng(seed, static_cast<std::uint64_t>(s));
}

}  // namespace amplex
