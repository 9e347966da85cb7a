#pragma once

#include "amplex/avoidance.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace amplex {

struct Chart {
  Box box;
  Vec marked;
  HyperplaneConfig frame;  // constant covectors
};

bool is_principal_frame(const Chart& chart);

struct CubicalCover {
  std::vector<Chart> parents;
  int c = 1;
  double C = 1.5;
  std::vector<Chart> children;
  std::vector<int> parent_of;
  std::vector<std::vector<int>> neighbors;  // sorted, self excluded
  std::vector<int> colors;
  int n_colors = 0;

  int dim() const { return parents.empty() ? 0 : parents.front().box.dim(); }
  std::vector<int> closed_neighborhood(int child) const;
};

// Each parent is cut into (2c)^n cubes which are then dilated by C about
// their centers. Coloring: greedy per parent, disjoint palettes, and two
// children of one color have disjoint closed neighborhoods.
CubicalCover subdivide_cover(const std::vector<Chart>& parents, int c, double C);

struct NeighborReport {
  std::vector<std::vector<int>> lists;
  int max_degree = 0;
  int bound = 0;
  bool within_bound = true;
};

// d1 <= 0 selects 3^n - 1, the lattice bound for C < 2.
NeighborReport neighbor_sets(const CubicalCover& cover, int d1 = 0);
// Exhaustive: no two children of one color share a closed neighbor.
bool coloring_sound(const CubicalCover& cover);

struct EpsSchedule {
  double A = 2.0;
  std::vector<double> log_eps;  // natural log, one per color

  std::size_t size() const { return log_eps.size(); }
  double eps(std::size_t i) const;
  // A * sum_{j > i} eps_j
  double margin(std::size_t i) const;
  double total() const;
};

// eps_i = eps0 * (2A + 2)^{-i}
EpsSchedule make_schedule(double eps0, double A, int n_colors);
// eps_i > 2A sum_{j>i} eps_j for every i, evaluated in log space.
bool schedule_ok(const std::vector<double>& log_eps, double A);
bool schedule_ok_linear(const std::vector<double>& eps, double A);

// Oracle for a fixed jet. `full` decides a configuration at a point. A
// decomposable oracle also provides per-covector and per-pair tests whose
// conjunction is `full`, evaluated on embedded covectors.
struct PreparedOracle {
  std::function<bool(const HyperplaneConfig&, const Vec&)> full;
  std::function<Vec(const Covector&)> embed;
  std::function<bool(const Vec&, const Vec&)> unary;
  std::function<bool(const Vec&, const Vec&, const Vec&)> pair;
  bool point_independent = false;
  // Exact clearance of a covector at a point; margin r passes when the
  // clearance exceeds asin(min(r, 1)).
  std::function<double(const Covector&, const Vec&)> clearance;

  bool decomposable() const { return static_cast<bool>(unary); }
};

struct Oracle {
  std::string name;
  std::function<PreparedOracle(const JetForms&)> prepare;
};

Oracle constant_oracle(bool value = true);
// 2-D: no covector within angle delta of the line field at angle
// theta0 + kappa * (x + y).
Oracle angle_oracle(double delta, double theta0, double kappa);
// template_A_member on the maximal configuration, jet constant in space.
Oracle hyp46_oracle();

struct JiggleConfig {
  double eps0 = 0.1;
  double A = 2.0;
  std::uint64_t seed = 0;
  int max_tries = 200;
  int probes_per_axis = 3;
  int margin_samples = 4;
  bool parallel = true;
  std::function<void(int color, const std::vector<HyperplaneConfig>& frames)> after_color;
};

class JiggleError : public Error {
 public:
  JiggleError(int child, int color);
  int child() const { return child_; }
  int color() const { return color_; }

 private:
  int child_;
  int color_;
};

struct JiggleResult {
  std::vector<HyperplaneConfig> frames;  // per child
  EpsSchedule schedule;
  std::vector<double> color_sup;       // largest covector displacement per color
  std::vector<double> frame_total;     // summed displacement per child frame
  double total_sup = 0.0;
  int perturbed_steps = 0;             // children that had to move their neighbors
  long long tries = 0;
};

std::vector<Vec> probe_points(const Box& box, int per_axis);

JiggleResult jiggle(const CubicalCover& cover, const Oracle& oracle, const JetForms& F, const JiggleConfig& cfg);

struct ProbeRecord {
  int child = 0;
  int probe = 0;
  Vec point;
  bool pass = false;
};

struct VerifyReport {
  long long probes = 0;
  long long passed = 0;
  long long failed = 0;
  bool schedule_ok = false;
  std::vector<int> failing_children;
  std::vector<ProbeRecord> records;

  double pass_fraction() const { return probes ? static_cast<double>(passed) / probes : 1.0; }
};

// Evaluates the oracle on the maximal configuration at a probe grid in
// every child.
VerifyReport verify_jiggle(const JiggleResult& result, const CubicalCover& cover, const Oracle& oracle,
                           const JetForms& F, int probes_per_axis, bool keep_records = false);

std::string probes_csv(const VerifyReport& report);

}  // namespace amplex
