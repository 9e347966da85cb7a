#include "amplex/rng.hpp"

#include <cmath>
#include <numbers>

namespace amplex {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(a) ^ (b * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

std::uint64_t CounterRng::hash(std::uint64_t key, std::uint64_t counter) {
  return splitmix(key ^ splitmix(counter + 0x632be59bd9b4e019ULL));
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::normal() {
  // Box-Muller, one value per call so the counter advance stays fixed.
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec CounterRng::normal_vec(Eigen::Index n, double sigma) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = sigma * normal();
  return v;
}

Vec CounterRng::in_ball(Eigen::Index n, double radius) {
  Vec v = normal_vec(n);
  double nrm = v.norm();
  if (nrm == 0.0) return Vec::Zero(n);
  double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(n));
  return v * (r / nrm);
}

std::uint64_t CounterRng::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  return next_u64() % bound;
}

CounterRng CounterRng::split(std::uint64_t index) const {
  return CounterRng(mix(key_, index + 1), Raw{});
}

}  // namespace amplex
