#include "amplex/relations.hpp"

#include <cmath>
#include <functional>

namespace amplex {

RelationId RelationId::exact_forms3() { return {RelationTag::ExactForms3, 0, 3}; }

RelationId RelationId::step2(int k, int n) {
  if (k < 2 || n <= k) throw DimensionError("Step2 needs 2 <= k < n");
  if (n - k > k * (k - 1) / 2) throw DimensionError("Step2 needs n - k <= k(k-1)/2");
  return {RelationTag::Step2, k, n};
}

RelationId RelationId::contact(int n) {
  if (n < 3 || n % 2 == 0) throw DimensionError("contact relation needs odd n >= 3");
  return {RelationTag::Contact, 0, n};
}

RelationId RelationId::even_contact(int n) {
  if (n < 4 || n % 2 != 0) throw DimensionError("even-contact relation needs even n >= 4");
  return {RelationTag::EvenContact, 0, n};
}

RelationId RelationId::hyp46() { return {RelationTag::Hyp46, 0, 6}; }
RelationId RelationId::ell46() { return {RelationTag::Ell46, 0, 6}; }

RelationId RelationId::no_critical_points(int n) {
  if (n < 2) throw DimensionError("no-critical-points relation needs n >= 2");
  return {RelationTag::NoCriticalPoints, 0, n};
}

int RelationId::forms() const {
  switch (tag) {
    case RelationTag::ExactForms3: return 2;
    case RelationTag::Step2: return n - k;
    case RelationTag::Contact:
    case RelationTag::EvenContact:
    case RelationTag::NoCriticalPoints: return 1;
    case RelationTag::Hyp46:
    case RelationTag::Ell46: return 2;
  }
  return 0;
}

std::string RelationId::name() const {
  switch (tag) {
    case RelationTag::ExactForms3: return "ExactForms3";
    case RelationTag::Step2: return "Step2(" + std::to_string(k) + "," + std::to_string(n) + ")";
    case RelationTag::Contact: return "Contact(" + std::to_string(n) + ")";
    case RelationTag::EvenContact: return "EvenContact(" + std::to_string(n) + ")";
    case RelationTag::Hyp46: return "Hyp46";
    case RelationTag::Ell46: return "Ell46";
    case RelationTag::NoCriticalPoints: return "NoCriticalPoints(" + std::to_string(n) + ")";
  }
  return "?";
}

const char* to_string(CaseTag t) {
  switch (t) {
    case CaseTag::GL2Case: return "GL2Case";
    case CaseTag::TransverseThin: return "TransverseThin";
    case CaseTag::MixedThin: return "MixedThin";
    case CaseTag::Annihilator: return "Annihilator";
    case CaseTag::MatrixCase: return "MatrixCase";
    case CaseTag::Case1: return "Case1";
    case CaseTag::Case2: return "Case2";
    case CaseTag::Case3a: return "Case3a";
    case CaseTag::Case3b: return "Case3b";
    case CaseTag::HypNontrivial: return "(i) NontriviallyAmple";
    case CaseTag::HypTrivial: return "(ii) TriviallyAmple";
    case CaseTag::HypNonAmple: return "(iii) NonAmple";
    case CaseTag::EllTrivial: return "EllTriviallyAmple";
    case CaseTag::EllNonAmple: return "EllNonAmple";
    case CaseTag::PointComplement: return "PointComplement";
    case CaseTag::NoComplement: return "NoComplement";
    case CaseTag::Degenerate: return "Degenerate";
  }
  return "?";
}

bool consistent_with_case_table(const SliceClassification& c) {
  using V = VerdictKind;
  const auto& codim = c.complement_codim;
  auto codim_is = [&](int v) { return codim && *codim == v; };
  switch (c.tag) {
    case CaseTag::GL2Case: return c.verdict == V::AmpleWitnessed && codim_is(1);
    case CaseTag::TransverseThin:
    case CaseTag::MixedThin: return c.verdict == V::AmpleWitnessed && codim_is(2);
    case CaseTag::Annihilator: return c.verdict == V::TriviallyAmpleFull && !codim;
    case CaseTag::MatrixCase: {
      auto it_r = c.aux.find("rows");
      auto it_c = c.aux.find("cols");
      if (it_r == c.aux.end() || it_c == c.aux.end()) return false;
      int r = static_cast<int>(it_r->second), cc = static_cast<int>(it_c->second);
      if (r == 0) return c.verdict == V::TriviallyAmpleFull && !codim;
      if (r > cc) return false;
      if (r == 1 && cc == 1) return c.verdict == V::NonAmpleWitnessed && codim_is(1);
      return c.verdict == V::AmpleWitnessed && codim_is(cc - r + 1);
    }
    case CaseTag::Case1: return c.verdict == V::TriviallyAmpleFull && !codim;
    case CaseTag::Case2: return c.verdict == V::NonAmpleWitnessed && codim_is(1);
    case CaseTag::Case3a: return c.verdict == V::AmpleWitnessed && codim_is(2);
    case CaseTag::Case3b: return c.verdict == V::TriviallyAmpleFull && !codim;
    case CaseTag::HypNontrivial: return c.verdict == V::AmpleWitnessed && codim_is(0);
    case CaseTag::HypTrivial:
    case CaseTag::EllTrivial: return c.verdict == V::TriviallyAmpleFull && !codim;
    case CaseTag::HypNonAmple: return c.verdict == V::NonAmpleWitnessed && codim_is(1);
    case CaseTag::EllNonAmple: return c.verdict == V::NonAmpleWitnessed && codim && (*codim == 0 || *codim == 1);
    case CaseTag::PointComplement: return c.verdict == V::NonAmpleWitnessed && codim_is(1);
    case CaseTag::NoComplement: return c.verdict == V::TriviallyAmpleFull && !codim;
    case CaseTag::Degenerate: return c.verdict == V::Inconclusive && !codim;
  }
  return false;
}

namespace {

void check_shape(const RelationId& id, const JetForms& F) {
  F.validate();
  if (F.n != id.n || F.m != id.forms()) throw DimensionError("jet shape does not match " + id.name());
}

Vec skew_coeffs(const Mat& s) {
  const Eigen::Index k = s.rows();
  Vec v(k * (k - 1) / 2);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i + 1; j < k; ++j) v(idx++) = s(i, j);
  return v;
}

Vec restricted_coeffs(const TwoForm& w, const Mat& basis) { return skew_coeffs(restrict_to(w, basis).matrix()); }

MemberResult rank_member(const Mat& rows) {
  RankReport r = numerical_rank(rows);
  return {r.rank == rows.rows(), r.boundary};
}

// |value| against a scale with the shared relative threshold
MemberResult nonzero_member(double value, double scale) {
  if (scale <= 0.0) return {false, false};
  double q = std::abs(value) / scale;
  return {q > kRankTolerance, q >= kRankTolerance / kBoundaryFactor && q <= kRankTolerance * kBoundaryFactor};
}

double coeff_norm(const Mat& skew) { return skew_coeffs(skew).norm(); }

Mat forms_on(const JetForms& F, const Mat& basis) {
  Mat rows(F.m, basis.cols() * (basis.cols() - 1) / 2);
  for (int i = 0; i < F.m; ++i) rows.row(i) = restricted_coeffs(F.d(i), basis).transpose();
  return rows;
}

GramPair gram_of(const Mat& w1, const Mat& w2) { return {wedge4(w1, w1), wedge4(w2, w2), wedge4(w1, w2)}; }

MemberResult gram_member(const GramPair& g, bool hyperbolic) {
  double scale = g.g11 * g.g11 + g.g22 * g.g22 + 2.0 * g.g12 * g.g12;
  if (scale == 0.0) return {false, false};
  double d = g.det();
  double q = std::abs(d) / scale;
  bool boundary = q >= kRankTolerance / kBoundaryFactor && q <= kRankTolerance * kBoundaryFactor;
  bool ok = q > kRankTolerance && (hyperbolic ? d < 0.0 : d > 0.0);
  return {ok, boundary};
}

}  // namespace

Mat distribution_basis(const JetForms& F) { return kernel_basis(rows_of(F.values)); }

double wedge4(const Mat& w, const Mat& e) {
  return w(0, 1) * e(2, 3) + w(2, 3) * e(0, 1) - w(0, 2) * e(1, 3) - w(1, 3) * e(0, 2) + w(0, 3) * e(1, 2) +
         w(1, 2) * e(0, 3);
}

Form contact_form(const JetForms& F) {
  if (F.m != 1) throw DimensionError("contact form needs a single 1-form");
  const int p = (F.n - 1) / 2;
  Form acc = Form::covector(F.values[0]);
  Form dF = Form::two_form(F.d(0).matrix());
  for (int i = 0; i < p; ++i) acc = acc.wedge(dF);
  return acc;
}

double contact_pfaffian(const JetForms& F, int n) {
  if (n < 3) throw DimensionError("contact pfaffian needs n >= 3");
  if (F.n != n || F.m != 1) throw DimensionError("jet shape does not match the contact relation");
  Form g = contact_form(F);
  if (n % 2 == 1) return g.top();
  return g.norm();
}

namespace {

MemberResult contact_member(const JetForms& F) {
  const int p = (F.n - 1) / 2;
  Form g = contact_form(F);
  double scale = F.values[0].norm() * std::pow(coeff_norm(F.d(0).matrix()), p);
  return nonzero_member(g.norm(), scale);
}

}  // namespace

MemberResult relation_member(const RelationId& id, const JetForms& F) {
  check_shape(id, F);
  switch (id.tag) {
    case RelationTag::ExactForms3: {
      Mat rows(2, 3);
      rows.row(0) = skew_coeffs(F.d(0).matrix()).transpose();
      rows.row(1) = skew_coeffs(F.d(1).matrix()).transpose();
      return rank_member(rows);
    }
    case RelationTag::Step2: {
      MemberResult v = rank_member(rows_of(F.values));
      if (!v.member) return v;
      MemberResult f = rank_member(forms_on(F, distribution_basis(F)));
      return {f.member, v.boundary || f.boundary};
    }
    case RelationTag::Contact:
    case RelationTag::EvenContact: return contact_member(F);
    case RelationTag::Hyp46:
    case RelationTag::Ell46: {
      MemberResult v = rank_member(rows_of(F.values));
      if (!v.member) return v;
      Mat Q = distribution_basis(F);
      GramPair g = gram_of(restrict_to(F.d(0), Q).matrix(), restrict_to(F.d(1), Q).matrix());
      MemberResult r = gram_member(g, id.tag == RelationTag::Hyp46);
      return {r.member, v.boundary || r.boundary};
    }
    case RelationTag::NoCriticalPoints: {
      double nrm = F.values[0].norm();
      return {nrm > kRankTolerance, nrm >= kRankTolerance / kBoundaryFactor && nrm <= kRankTolerance * kBoundaryFactor};
    }
  }
  return {};
}

int slice_dim(const RelationId& id) {
  if (id.tag == RelationTag::NoCriticalPoints) return 1;
  return id.n * id.forms();
}

JetForms slice_point(const RelationId& id, const JetForms& F, const Covector& lambda, const Vec& params) {
  if (params.size() != slice_dim(id)) throw DimensionError("slice parameter has wrong size for " + id.name());
  if (id.tag == RelationTag::NoCriticalPoints) {
    JetForms G = F;
    G.values[0] += params(0) * lambda;
    return G;
  }
  return PrincipalSlice{F, lambda}.at_params(params);
}

std::vector<PolynomialLocus> complement_polynomials(const RelationId& id, const PrincipalSlice& slice) {
  check_shape(id, slice.base);
  const JetForms F = slice.base;
  const Covector lambda = slice.lambda;
  std::vector<PolynomialLocus> out;
  PolynomialLocus locus;
  switch (id.tag) {
    case RelationTag::ExactForms3: {
      locus.degree = 2;
      locus.label = "dependent dF";
      for (int j = 0; j < 3; ++j) {
        locus.polys.push_back([F, lambda, id, j](const Vec& p) {
          JetForms G = slice_point(id, F, lambda, p);
          Eigen::Vector3d a = skew_coeffs(G.d(0).matrix()), b = skew_coeffs(G.d(1).matrix());
          return a.cross(b)(j);
        });
      }
      break;
    }
    case RelationTag::Step2: {
      const int m = F.m;
      const Mat Q = distribution_basis(F);
      const int cols = static_cast<int>(Q.cols() * (Q.cols() - 1) / 2);
      locus.degree = m;
      locus.label = "dependent curvature forms";
      for (auto mask : masks_of_degree(cols, m)) {
        std::vector<int> sel;
        for (int c = 0; c < cols; ++c)
          if (mask & (1u << c)) sel.push_back(c);
        locus.polys.push_back([F, lambda, id, Q, sel, m](const Vec& p) {
          JetForms G = slice_point(id, F, lambda, p);
          Mat rows = forms_on(G, Q);
          Mat sq(m, m);
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) sq(a, b) = rows(a, sel[static_cast<std::size_t>(b)]);
          return sq.determinant();
        });
      }
      break;
    }
    case RelationTag::Contact:
    case RelationTag::EvenContact: {
      locus.degree = 1;
      locus.label = "vanishing pfaffian";
      const int deg = (F.n % 2 == 1) ? F.n : F.n - 1;
      for (auto mask : masks_of_degree(F.n, deg)) {
        locus.polys.push_back([F, lambda, id, mask](const Vec& p) {
          return contact_form(slice_point(id, F, lambda, p)).coeff(mask);
        });
      }
      break;
    }
    case RelationTag::Hyp46:
    case RelationTag::Ell46: {
      locus.degree = 2;
      locus.label = "degenerate gram";
      const Mat Q = distribution_basis(F);
      locus.polys.push_back([F, lambda, id, Q](const Vec& p) {
        JetForms G = slice_point(id, F, lambda, p);
        return gram_of(restrict_to(G.d(0), Q).matrix(), restrict_to(G.d(1), Q).matrix()).det();
      });
      break;
    }
    case RelationTag::NoCriticalPoints: {
      locus.degree = 1;
      locus.label = "critical point";
      for (int j = 0; j < F.n; ++j)
        locus.polys.push_back([F, lambda, j](const Vec& p) { return F.values[0](j) + p(0) * lambda(j); });
      break;
    }
  }
  out.push_back(std::move(locus));
  return out;
}

SampledSet slice_set(const RelationId& id, const PrincipalSlice& slice) {
  SampledSet s;
  s.dim = slice_dim(id);
  const JetForms F = slice.base;
  const Covector lambda = slice.lambda;
  s.member = [id, F, lambda](const Vec& p) {
    MemberResult r = relation_member(id, slice_point(id, F, lambda, p));
    return r.member && !r.boundary;
  };
  s.loci = complement_polynomials(id, slice);
  return s;
}

Complement slice_complement(const RelationId& id, const PrincipalSlice& slice) {
  SampledSet s = slice_set(id, slice);
  Complement c;
  c.dim = s.dim;
  c.loci = s.loci;
  // Only the Gram relations have a complement with interior.
  if (id.tag == RelationTag::Hyp46 || id.tag == RelationTag::Ell46) {
    Predicate member = s.member;
    c.region = [member](const Vec& p) { return !member(p); };
  }
  return c;
}

SliceClassification exact_forms_classify(const JetForms& F, const Covector& lambda) {
  const RelationId id = RelationId::exact_forms3();
  MemberResult mr = relation_member(id, F);
  if (!mr.member) throw Error("jet is not in ExactForms3");
  SliceClassification c;
  if (mr.boundary || is_degenerate(lambda)) return c;
  Form l = Form::covector(lambda);
  int prop = 0;
  bool boundary = false;
  for (int i = 0; i < 2; ++i) {
    Form dF = Form::two_form(F.d(i).matrix());
    MemberResult nz = nonzero_member(l.wedge(dF).top(), lambda.norm() * dF.norm());
    boundary = boundary || nz.boundary;
    if (!nz.member) ++prop;
    c.aux["proportional_" + std::to_string(i + 1)] = nz.member ? 0.0 : 1.0;
  }
  if (boundary) return c;
  if (prop == 2) {
    c.tag = CaseTag::GL2Case;
    c.complement_codim = 1;
  } else if (prop == 0) {
    c.tag = CaseTag::TransverseThin;
    c.complement_codim = 2;
  } else {
    c.tag = CaseTag::MixedThin;
    c.complement_codim = 2;
  }
  c.verdict = VerdictKind::AmpleWitnessed;
  return c;
}

SliceClassification step2_classify(const JetForms& F, int k, int n, const Covector& lambda) {
  const RelationId id = RelationId::step2(k, n);
  MemberResult mr = relation_member(id, F);
  if (!mr.member) throw Error("jet is not in " + id.name());
  SliceClassification c;
  if (mr.boundary || is_degenerate(lambda)) return c;
  std::vector<Covector> ann = F.values;
  ann.push_back(lambda);
  RankReport rr = numerical_rank(rows_of(ann));
  if (rr.boundary) return c;
  if (rr.rank < static_cast<int>(ann.size())) {
    c.tag = CaseTag::Annihilator;
    c.verdict = VerdictKind::TriviallyAmpleFull;
    return c;
  }
  Mat W = kernel_basis(rows_of(ann));
  Mat rows = forms_on(F, W);
  RankReport lr = numerical_rank(rows);
  if (lr.boundary) return c;
  const int l = lr.rank;
  const int r = (n - k) - l;
  const int cols = k - 1;
  c.tag = CaseTag::MatrixCase;
  c.aux["l"] = l;
  c.aux["rows"] = r;
  c.aux["cols"] = cols;
  if (r == 0) {
    c.verdict = VerdictKind::TriviallyAmpleFull;
  } else if (r > cols) {
    // a member cannot land here; the rank-r matrices would be empty
    c.tag = CaseTag::Degenerate;
    c.verdict = VerdictKind::Inconclusive;
  } else if (r == 1 && cols == 1) {
    c.verdict = VerdictKind::NonAmpleWitnessed;
    c.complement_codim = 1;
  } else {
    c.verdict = VerdictKind::AmpleWitnessed;
    c.complement_codim = cols - r + 1;
  }
  return c;
}

SliceClassification contact_classify(const JetForms& F, int n, const Covector& lambda) {
  const RelationId id = n % 2 ? RelationId::contact(n) : RelationId::even_contact(n);
  MemberResult mr = relation_member(id, F);
  if (!mr.member) throw Error("jet is not in " + id.name());
  SliceClassification c;
  if (mr.boundary || is_degenerate(lambda)) return c;
  const Vec& alpha = F.values[0];
  Mat pair(2, n);
  pair.row(0) = alpha.transpose();
  pair.row(1) = lambda.transpose();
  RankReport pr = numerical_rank(pair);
  if (pr.boundary) return c;
  if (pr.rank < 2) {
    c.tag = CaseTag::Case1;
    c.verdict = VerdictKind::TriviallyAmpleFull;
    return c;
  }
  if (n % 2 == 1) {
    // Gamma(beta) = Gamma0 + g . beta; record the hyperplane
    const Vec zero = Vec::Zero(n);
    double g0 = contact_form(principal_point(F, lambda, {zero})).top();
    Vec g(n);
    for (int j = 0; j < n; ++j) g(j) = contact_form(principal_point(F, lambda, {Vec::Unit(n, j)})).top() - g0;
    c.tag = CaseTag::Case2;
    c.verdict = VerdictKind::NonAmpleWitnessed;
    c.complement_codim = 1;
    c.aux["offset"] = g0;
    c.aux_vector = g;
    return c;
  }
  Mat Q = distribution_basis(F);
  Mat w = restrict_to(F.d(0), Q).matrix();
  Eigen::JacobiSVD<Mat> svd(w, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const Eigen::Index dimxi = w.rows();
  if (s(0) == 0.0) return c;
  int small = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) / s(0) <= kRankTolerance * kBoundaryFactor) ++small;
  if (small != 1) return c;  // larger kernels are left as Degenerate
  Vec L = Q * svd.matrixV().col(dimxi - 1);
  c.aux_vector = L;
  MemberResult t = nonzero_member(lambda.dot(L), lambda.norm() * L.norm());
  if (t.boundary) return c;
  if (!t.member) {
    c.tag = CaseTag::Case3a;
    c.verdict = VerdictKind::AmpleWitnessed;
    c.complement_codim = 2;
  } else {
    c.tag = CaseTag::Case3b;
    c.verdict = VerdictKind::TriviallyAmpleFull;
  }
  return c;
}

SliceClassification no_critical_points_classify(const JetForms& F, const Covector& lambda) {
  const RelationId id = RelationId::no_critical_points(F.n);
  MemberResult mr = relation_member(id, F);
  if (!mr.member) throw Error("jet has a critical point");
  SliceClassification c;
  if (mr.boundary || is_degenerate(lambda)) return c;
  if (proportional(F.values[0], lambda)) {
    c.tag = CaseTag::PointComplement;
    c.verdict = VerdictKind::NonAmpleWitnessed;
    c.complement_codim = 1;
    // the removed parameter: df + c lambda = 0
    c.aux["c"] = -F.values[0].dot(lambda) / lambda.squaredNorm();
  } else {
    c.tag = CaseTag::NoComplement;
    c.verdict = VerdictKind::TriviallyAmpleFull;
  }
  return c;
}

GramPair hyp46_gram(const JetForms& F) {
  if (F.n != 6 || F.m != 2) throw DimensionError("Gram pair needs a jet of two forms on R^6");
  if (numerical_rank(rows_of(F.values)).rank < 2) throw Error("zero jets are dependent; no distribution");
  Mat Q = distribution_basis(F);
  return gram_of(restrict_to(F.d(0), Q).matrix(), restrict_to(F.d(1), Q).matrix());
}

GramPair psi_map(const JetForms& F, const Covector& lambda, const Covector& beta1, const Covector& beta2) {
  return hyp46_gram(principal_point(F, lambda, {beta1, beta2}));
}

Mat wedge_gram4() {
  const auto masks = masks_of_degree(4, 2);
  Mat G(6, 6);
  for (std::size_t a = 0; a < masks.size(); ++a)
    for (std::size_t b = 0; b < masks.size(); ++b) {
      Form fa(4, 2), fb(4, 2);
      fa.coeff(masks[a]) = 1.0;
      fb.coeff(masks[b]) = 1.0;
      G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = fa.wedge(fb).top();
    }
  return G;
}

Signature wedge_signature(int k) {
  if (k != 4) throw UnsupportedError("wedge signature is provided for k = 4 only");
  Eigen::SelfAdjointEigenSolver<Mat> es(wedge_gram4());
  Signature s;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double e = es.eigenvalues()(i);
    if (e > 1e-12) ++s.positive;
    else if (e < -1e-12) ++s.negative;
    else ++s.zero;
  }
  return s;
}

std::vector<CatalogEntry> list_catalog() {
  return {
      {"ExactForms3", "relation", 3, 2, "dF_1 and dF_2 linearly independent"},
      {"Step2(3,5)", "relation", 5, 2, "curvature forms on the distribution linearly independent (step 2)"},
      {"Step2(3,6)", "relation", 6, 3, "curvature forms on the distribution linearly independent (step 2)"},
      {"Step2(4,6)", "relation", 6, 2, "curvature forms on the distribution linearly independent (step 2)"},
      {"Contact(3)", "relation", 3, 1, "j0F ^ dF nonvanishing"},
      {"Contact(5)", "relation", 5, 1, "j0F ^ (dF)^2 nonvanishing"},
      {"EvenContact(4)", "relation", 4, 1, "j0F ^ dF nonvanishing, one-dimensional kernel"},
      {"Hyp46", "relation", 6, 2, "curvature plane of mixed signature (hyperbolic)"},
      {"Ell46", "relation", 6, 2, "curvature plane of definite signature (elliptic, fat)"},
      {"NoCriticalPoints(2)", "relation", 2, 1, "df nonvanishing"},
      {"NoCriticalPoints(3)", "relation", 3, 1, "df nonvanishing"},
      {"Hyp46Template", "template", 6, 2, "hyperbolic jets avoiding the first and second singularities"},
  };
}

}  // namespace amplex
