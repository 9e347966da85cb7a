#include "amplex/jetspace.hpp"
#include "amplex/rng.hpp"

#include <gtest/gtest.h>

using namespace amplex;

namespace {

JetForms random_jet_local(CounterRng& r, int n, int m) {
  JetForms F = JetForms::zero(n, m);
  for (int i = 0; i < m; ++i) {
    F.values[static_cast<std::size_t>(i)] = r.normal_vec(n);
    F.derivs[static_cast<std::size_t>(i)] = Mat::NullaryExpr(n, n, [&] { return r.normal(); });
  }
  return F;
}

Mat skew(int n, std::initializer_list<std::tuple<int, int, double>> entries) {
  Mat m = Mat::Zero(n, n);
  for (auto [a, b, v] : entries) {
    m(a, b) += v;
    m(b, a) -= v;
  }
  return m;
}

// rank of a skew matrix from its eigenvalues, independent of the library
int skew_rank(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * std::max(1.0, svd.singularValues()(0))) ++r;
  return r;
}

}  // namespace

TEST(JetSpace, SignConventionGolden) {
  // F = x dy: d_x F_y = 1 gives dF = dx ^ dy, entry (0,1) = +1
  JetForms F = JetForms::zero(2, 1);
  F.derivs[0](0, 1) = 1.0;
  EXPECT_DOUBLE_EQ(F.d(0).matrix()(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(F.d(0).matrix()(1, 0), -1.0);
}

TEST(JetSpace, TwoFormRejectsNonSkew) {
  Mat m = Mat::Zero(3, 3);
  m(0, 1) = 1.0;
  EXPECT_THROW(TwoForm{m}, Error);
}

TEST(JetSpace, PrincipalPointZeroShiftIsIdentity) {
  CounterRng r(1, 0);
  JetForms F = random_jet_local(r, 4, 2);
  JetForms G = principal_point(F, r.normal_vec(4), {Vec::Zero(4), Vec::Zero(4)});
  EXPECT_EQ(max_abs_diff(F, G), 0.0);
}

TEST(JetSpace, PrincipalPointRankOneUpdate) {
  JetForms F = JetForms::zero(2, 1);
  Vec lam(2), beta(2);
  lam << 1, 0;
  beta << 0, 1;
  JetForms G = principal_point(F, lam, {beta});
  EXPECT_DOUBLE_EQ(G.derivs[0](0, 1), 1.0);
  EXPECT_DOUBLE_EQ(G.derivs[0](1, 0), 0.0);
  EXPECT_DOUBLE_EQ(G.derivs[0](0, 0), 0.0);
  EXPECT_DOUBLE_EQ(G.d(0).matrix()(0, 1), 1.0);  // dx ^ dy
}

TEST(JetSpace, PrincipalPointInverse) {
  CounterRng r(2, 0);
  JetForms F = random_jet_local(r, 3, 2);
  Vec lam = r.normal_vec(3);
  std::vector<Covector> beta{r.normal_vec(3), r.normal_vec(3)}, neg{-beta[0], -beta[1]};
  JetForms back = principal_point(principal_point(F, lam, beta), lam, neg);
  EXPECT_LT(max_abs_diff(F, back), 1e-14);
}

TEST(JetSpace, PrincipalPointDimensionMismatch) {
  JetForms F = JetForms::zero(3, 1);
  EXPECT_THROW(principal_point(F, Vec::Zero(2), {Vec::Zero(3)}), DimensionError);
  EXPECT_THROW(principal_point(F, Vec::Zero(3), {Vec::Zero(3), Vec::Zero(3)}), DimensionError);
}

TEST(JetSpace, PrincipalMapInjective) {
  CounterRng r(3, 0);
  for (int t = 0; t < 20; ++t) {
    JetForms F = random_jet_local(r, 4, 2);
    Vec lam = r.normal_vec(4);
    std::vector<Covector> b1{r.normal_vec(4), r.normal_vec(4)}, b2{r.normal_vec(4), r.normal_vec(4)};
    EXPECT_GT(max_abs_diff(principal_point(F, lam, b1), principal_point(F, lam, b2)), 1e-6);
  }
}

TEST(JetSpace, SymPowerBasisExamples) {
  auto b = sym_power_basis(2, 1);
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0], Vec::Unit(2, 0));
  EXPECT_EQ(b[1], Vec::Unit(2, 1));
  auto b2 = sym_power_basis(2, 2);
  ASSERT_EQ(b2.size(), 3u);
  EXPECT_NEAR(b2[2](0), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(b2[2](1), 1.0 / std::sqrt(2.0), 1e-15);
  auto b3 = sym_power_basis(3, 1);
  EXPECT_EQ(numerical_rank(rows_of(b3)).rank, 3);
  EXPECT_THROW(sym_power_basis(3, 3), UnsupportedError);
}

TEST(JetSpace, SymSquaresIndependent) {
  for (int n = 1; n <= 5; ++n) {
    auto b = sym_power_basis(n, 2);
    ASSERT_EQ(static_cast<int>(b.size()), n * (n + 1) / 2);
    // upper-triangular coordinates of lambda lambda^T
    Mat rows(static_cast<Eigen::Index>(b.size()), n * (n + 1) / 2);
    for (std::size_t k = 0; k < b.size(); ++k) {
      int c = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) rows(static_cast<Eigen::Index>(k), c++) = b[k](i) * b[k](j);
    }
    EXPECT_GT(std::abs(rows.determinant()), 1e-12);
  }
}

TEST(JetSpace, RestrictSymplecticToHyperplane) {
  TwoForm w(skew(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
  TwoForm r = restrict_two_form(w, {Vec::Unit(4, 0)});
  EXPECT_EQ(r.dim(), 3);
  EXPECT_EQ(skew_rank(r.matrix()), 2);
}

TEST(JetSpace, RestrictNoAnnihilatorsKeepsForm) {
  TwoForm w(skew(4, {{0, 1, 1.0}, {2, 3, -2.0}}));
  TwoForm r = restrict_two_form(w, {});
  EXPECT_LT((r.matrix() - w.matrix()).norm(), 1e-14);
}

TEST(JetSpace, RestrictOnExplicitKernelBasis) {
  // kernel of dx1 + dx3 spanned by d2, d4, d1 - d3
  TwoForm minus(skew(4, {{0, 1, 1.0}, {2, 3, -1.0}}));
  TwoForm plus(skew(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
  Vec l(4);
  l << 1, 0, 1, 0;
  Restriction rm = restrict_two_form_with_basis(minus, {l});
  Restriction rp = restrict_two_form_with_basis(plus, {l});
  EXPECT_EQ(skew_rank(rm.form.matrix()), 2);
  Mat two(2, 3);
  auto coeffs = [](const Mat& s) {
    Vec v(3);
    v << s(0, 1), s(0, 2), s(1, 2);
    return v;
  };
  two.row(0) = coeffs(rm.form.matrix()).transpose();
  two.row(1) = coeffs(rp.form.matrix()).transpose();
  EXPECT_EQ(numerical_rank(two).rank, 2);

  // on the hand basis (d2, d4, d1 - d3), coefficients ordered (01, 02, 12)
  Mat B(4, 3);
  B << 0, 0, 1, 1, 0, 0, 0, 0, -1, 0, 1, 0;
  Vec hm = coeffs(restrict_to(minus, B).matrix()), hp = coeffs(restrict_to(plus, B).matrix());
  Vec em(3), ep(3);
  em << 0, -1, -1;
  ep << 0, -1, 1;
  EXPECT_LT((hm - em).norm(), 1e-14);
  EXPECT_LT((hp - ep).norm(), 1e-14);
}

TEST(JetSpace, RestrictDependentAnnihilatorsNamesPair) {
  TwoForm w(skew(4, {{0, 1, 1.0}}));
  Vec a = Vec::Unit(4, 0), b = Vec::Unit(4, 1);
  try {
    restrict_two_form(w, {a, b, 3.0 * b});
    FAIL();
  } catch (const DependentCovectorsError& e) {
    EXPECT_EQ(e.first(), 1);
    EXPECT_EQ(e.second(), 2);
  }
}

TEST(JetSpace, RestrictionLinear) {
  CounterRng r(4, 0);
  std::vector<Covector> ann{r.normal_vec(5), r.normal_vec(5)};
  Mat a = Mat::NullaryExpr(5, 5, [&] { return r.normal(); }), b = Mat::NullaryExpr(5, 5, [&] { return r.normal(); });
  TwoForm w1(Mat(a - a.transpose())), w2(Mat(b - b.transpose()));
  TwoForm lhs = restrict_two_form(w1 * 2.0 + w2 * -3.0, ann);
  TwoForm rhs = restrict_two_form(w1, ann) * 2.0 + restrict_two_form(w2, ann) * -3.0;
  EXPECT_LT((lhs.matrix() - rhs.matrix()).norm(), 1e-12);
}

TEST(JetSpace, RestrictionBlindToPrincipalShift) {
  CounterRng r(5, 0);
  for (int t = 0; t < 20; ++t) {
    JetForms F = random_jet_local(r, 5, 2);
    Vec lam = r.normal_vec(5);
    std::vector<Covector> ann{lam, r.normal_vec(5)};
    JetForms G = principal_point(F, lam, {r.normal_vec(5), r.normal_vec(5)});
    for (int i = 0; i < 2; ++i) {
      Mat a = restrict_two_form(F.d(i), ann).matrix(), b = restrict_two_form(G.d(i), ann).matrix();
      EXPECT_LT((a - b).norm(), 1e-12);
    }
  }
}

TEST(JetSpace, DecomposeExampleRows) {
  JetForms F = JetForms::zero(2, 1), G = F;
  G.derivs[0] << 1, 2, 3, 4;
  PrincipalPath p = principal_path_decompose(F, G, sym_power_basis(2, 1));
  ASSERT_EQ(p.length(), 2u);
  EXPECT_LT((p.steps[0].shifts[0] - Vec((Vec(2) << 1, 2).finished())).norm(), 1e-14);
  EXPECT_LT((p.steps[1].shifts[0] - Vec((Vec(2) << 3, 4).finished())).norm(), 1e-14);
}

TEST(JetSpace, DecomposeIdenticalIsEmpty) {
  CounterRng r(6, 0);
  JetForms F = random_jet_local(r, 3, 2);
  EXPECT_EQ(principal_path_decompose(F, F, sym_power_basis(3, 1)).length(), 0u);
}

TEST(JetSpace, DecomposeReplays) {
  CounterRng r(7, 0);
  for (int t = 0; t < 20; ++t) {
    JetForms F = random_jet_local(r, 4, 2), G = random_jet_local(r, 4, 2);
    G.values = F.values;
    Mat basis = Mat::NullaryExpr(4, 4, [&] { return r.normal(); });
    std::vector<Covector> b;
    for (int i = 0; i < 4; ++i) b.push_back(basis.row(i).transpose());
    PrincipalPath p = principal_path_decompose(F, G, b);
    EXPECT_LE(p.length(), 4u);
    EXPECT_LT(max_abs_diff(p.replay(), G), 1e-12);
  }
}

TEST(JetSpace, DecomposeRejectsDifferentFibres) {
  JetForms F = JetForms::zero(2, 1), G = F;
  G.values[0](0) = 1.0;
  EXPECT_THROW(principal_path_decompose(F, G, sym_power_basis(2, 1)), Error);
}

TEST(JetSpace, DegenerateCovector) {
  EXPECT_TRUE(is_degenerate(Vec::Zero(3)));
  EXPECT_FALSE(is_degenerate(Vec::Unit(3, 1)));
}
