#pragma once

// Data-parallel Monte-Carlo kernels. Each has a plain serial version kept
// as the reference and an OpenMP version; both produce identical output
// because every item draws from its own counter-based stream.

#include "amplex/convexity.hpp"

#include <cstddef>
#include <exception>
#include <vector>

namespace amplex::kernels {

enum class Mode { Serial, Parallel };

std::vector<char> evaluate_members_serial(const Predicate& member, const std::vector<Vec>& points);
std::vector<char> evaluate_members_parallel(const Predicate& member, const std::vector<Vec>& points);
std::vector<char> evaluate_members(const Predicate& member, const std::vector<Vec>& points, Mode mode);

struct TrialOutcome {
  char hit = 0;
  int rejections = 0;
};

// One crossing-probe trial: draw two endpoints outside the complement from
// the trial's own stream and test the segment.
TrialOutcome crossing_trial(const Complement& complement, const CrossingConfig& cfg, std::size_t trial);

std::vector<TrialOutcome> crossing_trials_serial(const Complement& complement, const CrossingConfig& cfg);
std::vector<TrialOutcome> crossing_trials_parallel(const Complement& complement, const CrossingConfig& cfg);
std::vector<TrialOutcome> crossing_trials(const Complement& complement, const CrossingConfig& cfg, Mode mode);

// out[i] = f(i) for i < n.
template <class R, class F>
std::vector<R> index_map_serial(std::size_t n, F&& f) {
  std::vector<R> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

template <class R, class F>
std::vector<R> index_map_parallel(std::size_t n, F&& f) {
  std::vector<R> out(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  // rethrow the lowest-index failure, as the serial loop would
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

template <class R, class F>
std::vector<R> index_map(std::size_t n, F&& f, Mode mode) {
  if (mode == Mode::Parallel) return index_map_parallel<R>(n, std::forward<F>(f));
  return index_map_serial<R>(n, std::forward<F>(f));
}

inline Mode mode_of(bool parallel) { return parallel ? Mode::Parallel : Mode::Serial; }

}  // namespace amplex::kernels
