#include "amplex/convexity.hpp"
#include "amplex/rng.hpp"

#include <gtest/gtest.h>

using namespace amplex;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

bool h_minus(const Vec& p) { return p(0) * p(1) - p(2) * p(2) < 0; }
bool h_plus_right(const Vec& p) { return p(0) * p(1) - p(2) * p(2) > 0 && p(0) > 0; }

void expect_certificates_replay(const AmplenessVerdict& v, const Predicate& member) {
  for (const auto& c : v.certificates) {
    EXPECT_LE(c.replay_error(), 1e-8);
    Vec back = Vec::Zero(c.target.size());
    double sum = 0;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      EXPECT_GE(c.weights[i], -1e-12);
      EXPECT_TRUE(member(c.points[i]));
      back += c.weights[i] * c.points[i];
      sum += c.weights[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_LE((back - c.target).norm(), 1e-8);
  }
}

}  // namespace

TEST(Components, TwoClusters) {
  std::vector<Vec> pts{v2(0, 0), v2(0.3, 0.1), v2(10, 0), v2(10.2, 0.4)};
  SampleCloud c = connected_components(pts, 1.0);
  EXPECT_EQ(c.components(), 2);
  EXPECT_EQ(c.labels[0], c.labels[1]);
  EXPECT_NE(c.labels[0], c.labels[2]);
}

TEST(Components, SinglePointAndEmpty) {
  EXPECT_EQ(connected_components({v2(1, 1)}, 1.0).components(), 1);
  EXPECT_EQ(connected_components({}, 1.0).components(), 0);
}

TEST(Components, HalfPlanesBySign) {
  CounterRng r(3, 0);
  std::vector<Vec> pts;
  while (pts.size() < 200) {
    Vec p(2);
    p << r.uniform(-4, 4), r.uniform(-2, 2);
    if (std::abs(p(0)) > 1) pts.push_back(p);
  }
  SampleCloud c = connected_components(pts, 1.0);
  EXPECT_EQ(c.components(), 2);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      EXPECT_EQ(c.labels[i] == c.labels[j], (pts[i](0) > 0) == (pts[j](0) > 0));
}

TEST(Hull, TriangleWeights) {
  std::vector<Vec> tri{v2(0, 0), v2(1, 0), v2(0, 1)};
  auto c = hull_contains(tri, v2(0.25, 0.25));
  ASSERT_TRUE(c);
  // barycentric coordinates solved by hand
  EXPECT_NEAR(c->weights[0], 0.5, 1e-9);
  EXPECT_NEAR(c->weights[1], 0.25, 1e-9);
  EXPECT_NEAR(c->weights[2], 0.25, 1e-9);
  EXPECT_FALSE(hull_contains(tri, v2(2, 2)));
}

TEST(Hull, ConePointFromHMinus) {
  std::vector<Vec> pts{v3(1, -1, 0), v3(-1, 1, 0)};
  ASSERT_TRUE(h_minus(pts[0]) && h_minus(pts[1]));
  auto c = hull_contains(pts, Vec::Zero(3));
  ASSERT_TRUE(c);
  EXPECT_NEAR(c->weights[0], 0.5, 1e-9);
  EXPECT_NEAR(c->weights[1], 0.5, 1e-9);
}

TEST(Ampleness, HMinusIsAmple) {
  AmplenessConfig cfg;
  cfg.seed = 5;
  cfg.center = v3(1, -1, 0);
  AmplenessVerdict v = ampleness_test(h_minus, 3, cfg);
  EXPECT_EQ(v.kind, VerdictKind::AmpleWitnessed);
  EXPECT_FALSE(v.certificates.empty());
  expect_certificates_replay(v, h_minus);
}

TEST(Ampleness, ConvexComponentNotAmple) {
  AmplenessConfig cfg;
  cfg.seed = 6;
  cfg.center = v3(1, 1, 0);
  AmplenessVerdict v = ampleness_test(h_plus_right, 3, cfg);
  ASSERT_EQ(v.kind, VerdictKind::NonAmpleWitnessed);
  ASSERT_TRUE(v.separation);
  const auto& s = *v.separation;
  EXPECT_GT(s.margin, 1e-6);
  for (const auto& p : v.component_points) EXPECT_GE(s(p), -1e-9);
  EXPECT_LT(s(s.target), -s.margin + 1e-9);
}

TEST(Ampleness, PointComplementInLineNotAmple) {
  PolynomialLocus wall{{[](const Vec& p) { return p(0) + 1.0; }}, 1, "point"};
  SampledSet set{1, [](const Vec& p) { return p(0) != -1.0; }, {wall}};
  for (double c : {0.0, -3.0}) {
    AmplenessConfig cfg;
    cfg.seed = 7;
    cfg.center = (Vec(1) << c).finished();
    EXPECT_EQ(ampleness_test(set, cfg).kind, VerdictKind::NonAmpleWitnessed) << c;
  }
}

TEST(Ampleness, TrivialVerdicts) {
  AmplenessConfig cfg;
  cfg.seed = 8;
  EXPECT_EQ(ampleness_test([](const Vec&) { return true; }, 2, cfg).kind, VerdictKind::TriviallyAmpleFull);
  EXPECT_EQ(ampleness_test([](const Vec&) { return false; }, 2, cfg).kind, VerdictKind::TriviallyAmpleEmpty);
}

TEST(Ampleness, TooFewSamplesRejected) {
  AmplenessConfig cfg;
  cfg.n_samples = 2;
  EXPECT_THROW(ampleness_test([](const Vec&) { return true; }, 3, cfg), Error);
}

TEST(Ampleness, DeterministicGivenSeed) {
  AmplenessConfig cfg;
  cfg.seed = 9;
  cfg.center = v3(1, -1, 0);
  AmplenessVerdict a = ampleness_test(h_minus, 3, cfg), b = ampleness_test(h_minus, 3, cfg);
  EXPECT_EQ(a.kind, b.kind);
  ASSERT_EQ(a.component_points.size(), b.component_points.size());
  for (std::size_t i = 0; i < a.component_points.size(); ++i) EXPECT_EQ(a.component_points[i], b.component_points[i]);
}

TEST(Ampleness, SerialMatchesParallel) {
  AmplenessConfig cfg;
  cfg.seed = 10;
  cfg.center = v3(1, -1, 0);
  AmplenessVerdict p = ampleness_test(h_minus, 3, cfg);
  cfg.parallel = false;
  AmplenessVerdict s = ampleness_test(h_minus, 3, cfg);
  EXPECT_EQ(p.kind, s.kind);
  EXPECT_EQ(p.n_members, s.n_members);
  ASSERT_EQ(p.component_points.size(), s.component_points.size());
  for (std::size_t i = 0; i < p.component_points.size(); ++i) EXPECT_EQ(p.component_points[i], s.component_points[i]);
}

TEST(Crossing, HyperplaneCrossed) {
  Complement c{3, nullptr, {PolynomialLocus{{[](const Vec& p) { return p(0); }}, 1, "x=0"}}};
  CrossingConfig cfg;
  cfg.seed = 1;
  EXPECT_EQ(line_crossing_probe(c, cfg), 1);
}

TEST(Crossing, LineIsThin) {
  Complement c{3, nullptr,
               {PolynomialLocus{{[](const Vec& p) { return p(0); }, [](const Vec& p) { return p(1); }}, 1, "x=y=0"}}};
  CrossingConfig cfg;
  cfg.seed = 2;
  cfg.trials = 10000;
  EXPECT_EQ(line_crossing_probe(c, cfg), 2);
}

TEST(Crossing, ConeCrossed) {
  Complement c{3, nullptr,
               {PolynomialLocus{{[](const Vec& p) { return p(0) * p(1) - p(2) * p(2); }}, 2, "cone"}}};
  CrossingConfig cfg;
  cfg.seed = 3;
  EXPECT_EQ(line_crossing_probe(c, cfg), 1);
}

TEST(Crossing, FullComplementErrors) {
  Complement c{2, [](const Vec&) { return true; }, {}};
  CrossingConfig cfg;
  EXPECT_THROW(line_crossing_probe(c, cfg), Error);
  cfg.trials = 50;
  EXPECT_THROW(line_crossing_probe(Complement{2, nullptr, {}}, cfg), Error);
}

TEST(Crossing, SerialMatchesParallel) {
  Complement c{3, [](const Vec& p) { return std::abs(p(0) - 0.3) < 0.01; }, {}};
  CrossingConfig cfg;
  cfg.seed = 4;
  cfg.trials = 300;
  CrossingConfig s = cfg;
  s.parallel = false;
  EXPECT_EQ(line_crossing_probe(c, cfg), line_crossing_probe(c, s));
}

TEST(GlWitness, IdentityNegative) {
  auto w = gl_ample_witness(Mat::Identity(2, 2), -1);
  ASSERT_EQ(w.size(), 2u);
  Mat a(2, 2), b(2, 2);
  a << -1, 0, 0, 3;
  b << 3, 0, 0, -1;
  EXPECT_DOUBLE_EQ(w[0].first, 0.5);
  EXPECT_LT((w[0].second - a).norm(), 1e-14);
  EXPECT_LT((w[1].second - b).norm(), 1e-14);
  EXPECT_NEAR(w[0].second.determinant(), -3.0, 1e-12);
}

TEST(GlWitness, ZeroMatrixShift) {
  auto w = gl_ample_witness(Mat::Zero(2, 2), -1);
  ASSERT_EQ(w.size(), 2u);
  Mat sum = Mat::Zero(2, 2);
  for (auto& [wt, M] : w) {
    EXPECT_GT(std::abs(M.determinant()), 1e-9);
    sum += wt * M;
  }
  EXPECT_LT(sum.norm(), 1e-12);
  EXPECT_LT((w[0].second + 2.0 * Mat::Identity(2, 2)).norm(), 1e-12);
  EXPECT_LT((w[1].second - 2.0 * Mat::Identity(2, 2)).norm(), 1e-12);
}

TEST(GlWitness, RandomPositiveToNegative) {
  CounterRng r(11, 0);
  for (int t = 0; t < 100; ++t) {
    Mat M = Mat::NullaryExpr(3, 3, [&] { return r.normal(); });
    if (M.determinant() < 0) M.col(0) *= -1;
    auto w = gl_ample_witness(M, -1);
    Mat sum = Mat::Zero(3, 3);
    for (auto& [wt, X] : w) {
      sum += wt * X;
      // column multilinearity: det = -3 det M
      EXPECT_NEAR(X.determinant(), -3.0 * M.determinant(), 1e-9 * std::max(1.0, std::abs(M.determinant())));
    }
    EXPECT_LE((sum - M).norm(), 1e-10);
  }
}

TEST(GlWitness, OneByOneRejected) { EXPECT_THROW(gl_ample_witness(Mat::Identity(1, 1), -1), Error); }

TEST(Chext, TrivialAndConePoint) {
  AmplenessConfig cfg;
  cfg.seed = 12;
  Vec F = v3(1, -1, 0);
  std::vector<Vec> full{Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2)};
  ChextResult same = chext_member(h_minus, F, full, F, cfg);
  EXPECT_TRUE(same.inside);
  ChextResult cone = chext_member(h_minus, F, full, Vec::Zero(3), cfg);
  ASSERT_TRUE(cone.inside);
  ASSERT_TRUE(cone.certificate);
  EXPECT_LE(cone.certificate->replay_error(), 1e-8);
}

TEST(Chext, ConvexComponentExcludesOutsidePoint) {
  AmplenessConfig cfg;
  cfg.seed = 13;
  std::vector<Vec> full{Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2)};
  EXPECT_FALSE(chext_member(h_plus_right, v3(1, 1, 0), full, v3(-1, -1, 0), cfg).inside);
}

TEST(Chext, OffSliceRejected) {
  AmplenessConfig cfg;
  EXPECT_THROW(chext_member(h_minus, v3(1, -1, 0), {Vec::Unit(3, 0)}, v3(1, 0, 0), cfg), Error);
}

TEST(Loop, HMinusAroundConePoint) {
  AmplenessConfig cfg;
  cfg.seed = 14;
  Loop l = loop_with_average(h_minus, v3(1, -1, 0), Vec::Zero(3), 64, cfg);
  ASSERT_EQ(l.samples.size(), 64u);
  EXPECT_LE(l.mean().norm(), 1e-6);
  for (const auto& s : l.samples) EXPECT_TRUE(h_minus(s));
}

TEST(Loop, ConstantWhenTargetInside) {
  AmplenessConfig cfg;
  Loop l = loop_with_average(h_minus, v3(1, -1, 0), v3(2, -1, 0), 5, cfg);
  for (const auto& s : l.samples) EXPECT_EQ(s, v3(2, -1, 0));
}

TEST(Loop, PointComplementCannotReachThePoint) {
  PolynomialLocus wall{{[](const Vec& p) { return p(0) + 1.0; }}, 1, "point"};
  SampledSet set{1, [](const Vec& p) { return p(0) != -1.0; }, {wall}};
  AmplenessConfig cfg;
  cfg.seed = 15;
  EXPECT_THROW(loop_with_average(set, Vec::Zero(1), (Vec(1) << -1.0).finished(), 16, cfg), Error);
}
