#pragma once

#include "amplex/linalg.hpp"

#include <optional>
#include <vector>

namespace amplex::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Result {
  Status status = Status::Infeasible;
  Vec x;
  double objective = 0.0;
};

// maximize c.x  subject to  A x <= b, x >= 0, with b >= 0 (slack start).
Result maximize_leq(const Mat& A, const Vec& b, const Vec& c);

// Find x >= 0 with A x = b (phase one with artificial variables).
Result feasible_eq(const Mat& A, const Vec& b);

// Convex weights w >= 0, sum w = 1, sum w_i p_i = target, replay error
// at most 1e-8; absent when the target is outside the hull.
std::optional<Vec> hull_weights(const std::vector<Vec>& points, const Vec& target);

// Affine functional l(x) = gradient.x + offset with |gradient|_inf <= 1,
// l >= 0 on the points and l(target) <= -margin, margin maximal.
struct Separation {
  Vec gradient;
  double offset = 0.0;
  double margin = 0.0;
};
Separation separate(const std::vector<Vec>& points, const Vec& target);

}  // namespace amplex::lp
