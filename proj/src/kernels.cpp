#include "amplex/kernels.hpp"

#include "amplex/rng.hpp"

namespace amplex::kernels {

std::vector<char> evaluate_members_serial(const Predicate& member, const std::vector<Vec>& points) {
  return index_map_serial<char>(points.size(), [&](std::size_t i) -> char { return member(points[i]) ? 1 : 0; });
}

std::vector<char> evaluate_members_parallel(const Predicate& member, const std::vector<Vec>& points) {
  return index_map_parallel<char>(points.size(), [&](std::size_t i) -> char { return member(points[i]) ? 1 : 0; });
}

std::vector<char> evaluate_members(const Predicate& member, const std::vector<Vec>& points, Mode mode) {
  return mode == Mode::Parallel ? evaluate_members_parallel(member, points) : evaluate_members_serial(member, points);
}

namespace {

constexpr int kEndpointAttempts = 10;

bool in_region(const Complement& c, const Vec& x) { return c.region && c.region(x); }

}  // namespace

TrialOutcome crossing_trial(const Complement& complement, const CrossingConfig& cfg, std::size_t trial) {
  TrialOutcome out;
  CounterRng rng = make_rng(cfg.seed, Stream::Crossing).split(trial);
  const Vec center = cfg.center ? *cfg.center : Vec::Zero(complement.dim);
  Vec ends[2];
  for (auto& e : ends) {
    bool found = false;
    while (out.rejections < kEndpointAttempts) {
      e = center + rng.normal_vec(complement.dim, cfg.scale);
      if (!in_region(complement, e)) {
        found = true;
        break;
      }
      ++out.rejections;
    }
    if (!found) return out;
  }
  if (complement.region) {
    for (int s = 1; s < cfg.steps; ++s) {
      double t = static_cast<double>(s) / cfg.steps;
      if (complement.region(ends[0] + t * (ends[1] - ends[0]))) {
        out.hit = 1;
        return out;
      }
    }
  }
  for (const auto& locus : complement.loci) {
    if (segment_hits_locus(locus, ends[0], ends[1])) {
      out.hit = 1;
      return out;
    }
  }
  return out;
}

std::vector<TrialOutcome> crossing_trials_serial(const Complement& complement, const CrossingConfig& cfg) {
  return index_map_serial<TrialOutcome>(static_cast<std::size_t>(cfg.trials),
                                        [&](std::size_t i) { return crossing_trial(complement, cfg, i); });
}

std::vector<TrialOutcome> crossing_trials_parallel(const Complement& complement, const CrossingConfig& cfg) {
  return index_map_parallel<TrialOutcome>(static_cast<std::size_t>(cfg.trials),
                                          [&](std::size_t i) { return crossing_trial(complement, cfg, i); });
}

std::vector<TrialOutcome> crossing_trials(const Complement& complement, const CrossingConfig& cfg, Mode mode) {
  return mode == Mode::Parallel ? crossing_trials_parallel(complement, cfg) : crossing_trials_serial(complement, cfg);
}

}  // namespace amplex::kernels
