#include "amplex/jiggling.hpp"
#include "amplex/scenario.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace amplex;

namespace {

Chart unit_chart(int n) {
  std::vector<Covector> basis;
  for (int i = 0; i < n; ++i) basis.push_back(Vec::Unit(n, i));
  return {Box{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)}, Vec::Zero(n), HyperplaneConfig::strict(basis)};
}

// Brute-force overlap of closed boxes.
bool boxes_meet(const Box& a, const Box& b) {
  for (int i = 0; i < a.dim(); ++i)
    if (a.hi(i) < b.lo(i) - 1e-12 || b.hi(i) < a.lo(i) - 1e-12) return false;
  return true;
}

int interior_child(const CubicalCover& cov) {
  // child whose center is closest to the parent center
  int best = 0;
  double bd = 1e300;
  for (std::size_t i = 0; i < cov.children.size(); ++i) {
    double d = cov.children[i].box.center().norm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

}  // namespace

TEST(Subdivide, CountsAndSides) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  ASSERT_EQ(cov.children.size(), 16u);
  for (const auto& ch : cov.children) {
    EXPECT_NEAR(ch.box.hi(0) - ch.box.lo(0), 0.75, 1e-12);
    EXPECT_NEAR(ch.box.hi(1) - ch.box.lo(1), 0.75, 1e-12);
    EXPECT_LT((ch.marked - ch.box.center()).norm(), 1e-12);
    EXPECT_TRUE(is_principal_frame(ch));
  }
  for (int n = 1; n <= 3; ++n) EXPECT_EQ(subdivide_cover({unit_chart(n)}, 1, 1.5).children.size(), 1u << n);
  EXPECT_EQ(subdivide_cover({unit_chart(3)}, 3, 1.2).children.size(), 216u);
}

TEST(Subdivide, RejectsBadParameters) {
  EXPECT_THROW(subdivide_cover({unit_chart(2)}, 2, 2.0), Error);
  EXPECT_THROW(subdivide_cover({unit_chart(2)}, 2, 1.0), Error);
  EXPECT_THROW(subdivide_cover({unit_chart(2)}, 0, 1.5), Error);
}

TEST(Subdivide, NeighborsMatchBruteForce) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  for (std::size_t i = 0; i < cov.children.size(); ++i) {
    std::vector<int> expect;
    for (std::size_t j = 0; j < cov.children.size(); ++j)
      if (i != j && boxes_meet(cov.children[i].box, cov.children[j].box)) expect.push_back(static_cast<int>(j));
    EXPECT_EQ(cov.neighbors[i], expect);
  }
}

TEST(Subdivide, InteriorAndCornerDegrees) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  NeighborReport r = neighbor_sets(cov);
  EXPECT_EQ(r.bound, 8);
  EXPECT_TRUE(r.within_bound);
  int mid = interior_child(cov);
  EXPECT_EQ(r.lists[static_cast<std::size_t>(mid)].size(), 8u);
  std::size_t corner = r.lists.size();
  for (std::size_t i = 0; i < r.lists.size(); ++i)
    if (cov.children[i].box.lo(0) < -1.0 && cov.children[i].box.lo(1) < -1.0) corner = i;
  ASSERT_LT(corner, r.lists.size());
  EXPECT_LT(r.lists[corner].size(), 8u);
}

TEST(Subdivide, InteriorDegreeIndependentOfC) {
  for (int c : {2, 4, 8}) {
    CubicalCover cov = subdivide_cover({unit_chart(2)}, c, 1.5);
    NeighborReport r = neighbor_sets(cov);
    EXPECT_EQ(r.lists[static_cast<std::size_t>(interior_child(cov))].size(), 8u) << c;
    EXPECT_TRUE(r.within_bound);
  }
}

TEST(Subdivide, TightBoundFlagsViolation) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  NeighborReport r = neighbor_sets(cov, 5);
  EXPECT_FALSE(r.within_bound);
  EXPECT_EQ(r.max_degree, 8);
}

TEST(Coloring, SoundByPairScan) {
  for (int n = 1; n <= 3; ++n)
    for (int c : {1, 2, 4}) {
      if (n == 3 && c == 4) continue;
      CubicalCover cov = subdivide_cover({unit_chart(n)}, c, 1.5);
      EXPECT_TRUE(coloring_sound(cov));
      // independent scan: same color implies disjoint closed neighborhoods
      for (std::size_t i = 0; i < cov.children.size(); ++i)
        for (std::size_t j = i + 1; j < cov.children.size(); ++j) {
          if (cov.colors[i] != cov.colors[j]) continue;
          auto a = cov.closed_neighborhood(static_cast<int>(i)), b = cov.closed_neighborhood(static_cast<int>(j));
          std::set<int> sa(a.begin(), a.end());
          for (int v : b) ASSERT_EQ(sa.count(v), 0u) << n << " " << c << " " << i << " " << j;
        }
    }
}

TEST(Coloring, DisjointPalettesPerParent) {
  Chart a = unit_chart(2), b = unit_chart(2);
  b.box.lo += Vec::Constant(2, 1.5);
  b.box.hi += Vec::Constant(2, 1.5);
  b.marked = b.box.center();
  CubicalCover cov = subdivide_cover({a, b}, 2, 1.5);
  std::set<int> pa, pb;
  for (std::size_t i = 0; i < cov.children.size(); ++i) (cov.parent_of[i] == 0 ? pa : pb).insert(cov.colors[i]);
  for (int col : pa) EXPECT_EQ(pb.count(col), 0u);
  EXPECT_TRUE(coloring_sound(cov));
}

TEST(Schedule, ArithmeticExample) {
  EXPECT_TRUE(schedule_ok_linear({1.0, 0.2, 0.04}, 2.0));
  EXPECT_FALSE(schedule_ok_linear({0.95, 0.2, 0.04}, 2.0));
  EXPECT_FALSE(schedule_ok_linear({1.0, 0.15, 0.04}, 2.0));
  EXPECT_TRUE(schedule_ok({std::log(1.0), std::log(0.2), std::log(0.04)}, 2.0));
}

TEST(Schedule, GeometricScheduleBudget) {
  for (int colors : {1, 4, 16, 64, 729}) {
    EpsSchedule s = make_schedule(0.1, 2.0, colors);
    ASSERT_EQ(s.size(), static_cast<std::size_t>(colors));
    EXPECT_TRUE(schedule_ok(s.log_eps, 2.0));
    EXPECT_LE(s.total(), 0.2);
    if (colors > 1) EXPECT_NEAR(s.eps(1) / s.eps(0), 1.0 / 6.0, 1e-12);
  }
  // deep schedules underflow in linear space but not in log space
  EpsSchedule deep = make_schedule(0.1, 2.0, 729);
  EXPECT_TRUE(std::isfinite(deep.log_eps.back()));
}

TEST(Jiggle, ConstantOracleIsIdentity) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  JiggleConfig cfg;
  cfg.seed = 1;
  JiggleResult r = jiggle(cov, constant_oracle(true), JetForms::zero(2, 1), cfg);
  EXPECT_EQ(r.total_sup, 0.0);
  for (std::size_t i = 0; i < cov.children.size(); ++i)
    for (std::size_t k = 0; k < r.frames[i].size(); ++k) EXPECT_EQ(r.frames[i][k], cov.children[i].frame[k]);
}

TEST(Jiggle, AngleOracleClearsForbiddenField) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  Oracle o = angle_oracle(0.05, 0.1, 0.02);
  JiggleConfig cfg;
  cfg.seed = 7;
  JiggleResult r = jiggle(cov, o, JetForms::zero(2, 1), cfg);
  EXPECT_GT(r.total_sup, 0.0);
  EXPECT_LE(r.total_sup, 2 * cfg.eps0);
  VerifyReport v = verify_jiggle(r, cov, o, JetForms::zero(2, 1), 3);
  EXPECT_EQ(v.failed, 0);
  EXPECT_TRUE(v.schedule_ok);
  EXPECT_EQ(v.probes, 16 * 9);
  // a denser probe grid than the one used while jiggling
  VerifyReport dense = verify_jiggle(r, cov, o, JetForms::zero(2, 1), 7);
  EXPECT_EQ(dense.failed, 0);
  // per-color sup stays within the color's ball
  for (std::size_t i = 0; i < r.color_sup.size(); ++i) EXPECT_LE(r.color_sup[i], r.schedule.eps(i) + 1e-15);
}

TEST(Jiggle, MonotoneSafetyByReplay) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  Oracle o = angle_oracle(0.05, 0.3, 0.1);
  PreparedOracle po = o.prepare(JetForms::zero(2, 1));
  JiggleConfig cfg;
  cfg.seed = 8;
  std::vector<std::vector<HyperplaneConfig>> snapshots;
  cfg.after_color = [&](int, const std::vector<HyperplaneConfig>& frames) { snapshots.push_back(frames); };
  JiggleResult r = jiggle(cov, o, JetForms::zero(2, 1), cfg);
  ASSERT_EQ(snapshots.size(), static_cast<std::size_t>(cov.n_colors));
  // whatever a color settled stays settled in the final frames
  for (std::size_t col = 0; col < snapshots.size(); ++col)
    for (std::size_t u = 0; u < cov.children.size(); ++u) {
      if (cov.colors[u] != static_cast<int>(col)) continue;
      for (const Vec& p : probe_points(cov.children[u].box, 3)) {
        std::vector<Covector> cs;
        for (int v : cov.closed_neighborhood(static_cast<int>(u)))
          if (cov.children[static_cast<std::size_t>(v)].box.contains(p))
            for (const auto& c : r.frames[static_cast<std::size_t>(v)].covectors()) cs.push_back(c);
        EXPECT_TRUE(po.full(HyperplaneConfig::lifted(cs), p));
      }
    }
}

TEST(Jiggle, FaultInjectionLocalized) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  const double kappa = 0.02, theta0 = 0.1;
  Oracle o = angle_oracle(0.05, theta0, kappa);
  JiggleConfig cfg;
  cfg.seed = 9;
  JiggleResult r = jiggle(cov, o, JetForms::zero(2, 1), cfg);
  int k = interior_child(cov);
  Vec m = cov.children[static_cast<std::size_t>(k)].marked;
  double th = theta0 + kappa * (m(0) + m(1));
  Vec bad(2);
  bad << std::cos(th), std::sin(th);
  r.frames[static_cast<std::size_t>(k)] = HyperplaneConfig::strict({bad});
  VerifyReport v = verify_jiggle(r, cov, o, JetForms::zero(2, 1), 3);
  EXPECT_GT(v.failed, 0);
  auto hood = cov.closed_neighborhood(k);
  for (int f : v.failing_children) EXPECT_NE(std::find(hood.begin(), hood.end(), f), hood.end());
}

TEST(Jiggle, Deterministic) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  Oracle o = angle_oracle(0.05, 0.1, 0.02);
  JiggleConfig cfg;
  cfg.seed = 10;
  JiggleResult a = jiggle(cov, o, JetForms::zero(2, 1), cfg), b = jiggle(cov, o, JetForms::zero(2, 1), cfg);
  EXPECT_EQ(a.total_sup, b.total_sup);
  EXPECT_EQ(a.tries, b.tries);
  for (std::size_t i = 0; i < a.frames.size(); ++i)
    for (std::size_t k = 0; k < a.frames[i].size(); ++k) EXPECT_EQ(a.frames[i][k], b.frames[i][k]);
}

TEST(Jiggle, SerialMatchesParallel) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 2, 1.5);
  Oracle o = angle_oracle(0.05, 0.1, 0.02);
  JiggleConfig cfg;
  cfg.seed = 11;
  cfg.max_tries = 2000;
  JiggleResult p = jiggle(cov, o, JetForms::zero(2, 1), cfg);
  cfg.parallel = false;
  JiggleResult s = jiggle(cov, o, JetForms::zero(2, 1), cfg);
  EXPECT_EQ(p.total_sup, s.total_sup);
  EXPECT_EQ(p.tries, s.tries);
  EXPECT_EQ(p.perturbed_steps, s.perturbed_steps);
  for (std::size_t i = 0; i < p.frames.size(); ++i)
    for (std::size_t k = 0; k < p.frames[i].size(); ++k) EXPECT_EQ(p.frames[i][k], s.frames[i][k]);
}

TEST(Jiggle, ImpossibleOracleReportsChildAndColor) {
  CubicalCover cov = subdivide_cover({unit_chart(2)}, 1, 1.5);
  JiggleConfig cfg;
  cfg.max_tries = 5;
  try {
    jiggle(cov, constant_oracle(false), JetForms::zero(2, 1), cfg);
    FAIL();
  } catch (const JiggleError& e) {
    EXPECT_GE(e.child(), 0);
    EXPECT_EQ(e.color(), cov.colors[static_cast<std::size_t>(e.child())]);
  }
}

TEST(Jiggle, Hyp46SmallCover) {
  // 6-D: c = 1 keeps the cover at 64 children
  CubicalCover cov = subdivide_cover({unit_chart(6)}, 1, 1.5);
  JetForms F = *named_jet("hyp_a1b1");
  JiggleConfig cfg;
  cfg.seed = 12;
  cfg.probes_per_axis = 2;
  JiggleResult r = jiggle(cov, hyp46_oracle(), F, cfg);
  VerifyReport v = verify_jiggle(r, cov, hyp46_oracle(), F, 2);
  EXPECT_EQ(v.failed, 0);
  EXPECT_TRUE(v.schedule_ok);
  EXPECT_LE(r.total_sup, 2 * cfg.eps0);
}

TEST(Probes, GridAndCsv) {
  Box b{Vec::Constant(2, 0.0), Vec::Constant(2, 1.0)};
  auto pts = probe_points(b, 3);
  ASSERT_EQ(pts.size(), 9u);
  EXPECT_NEAR(pts[4](0), 0.5, 1e-15);
  EXPECT_EQ(probe_points(b, 1).front(), b.center());
  EXPECT_THROW(probe_points(b, 0), Error);

  CubicalCover cov = subdivide_cover({unit_chart(2)}, 1, 1.5);
  JiggleConfig cfg;
  JiggleResult r = jiggle(cov, constant_oracle(true), JetForms::zero(2, 1), cfg);
  VerifyReport v = verify_jiggle(r, cov, constant_oracle(true), JetForms::zero(2, 1), 2, true);
  std::string csv = probes_csv(v);
  EXPECT_EQ(csv.substr(0, csv.find("\r\n")), "child,probe,x0,x1,pass");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 4 * 4);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\r'), 1 + 4 * 4);
}
