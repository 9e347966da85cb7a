#include "amplex/avoidance.hpp"

#include "amplex/exterior.hpp"
#include "amplex/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>

namespace amplex {

// ---------------------------------------------------------------- configs

Covector HyperplaneConfig::normalize(const Covector& c) {
  double nrm = c.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw DimensionError("hyperplane covector must be nonzero and finite");
  Covector u = c / nrm;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u(i)) > 1e-12) {
      if (u(i) < 0.0) u = -u;
      break;
    }
  }
  return u;
}

HyperplaneConfig HyperplaneConfig::strict(const std::vector<Covector>& covectors) {
  HyperplaneConfig h;
  for (const auto& c : covectors) h.cs_.push_back(normalize(c));
  for (std::size_t j = 0; j < h.cs_.size(); ++j) {
    if (h.cs_[j].size() != h.cs_.front().size()) throw DimensionError("configuration covectors differ in size");
    for (std::size_t i = 0; i < j; ++i)
      if (proportional(h.cs_[i], h.cs_[j])) throw DependentCovectorsError(static_cast<int>(i), static_cast<int>(j));
  }
  return h;
}

HyperplaneConfig HyperplaneConfig::lifted(const std::vector<Covector>& covectors) {
  HyperplaneConfig h;
  for (const auto& c : covectors) {
    h.cs_.push_back(normalize(c));
    if (h.cs_.back().size() != h.cs_.front().size()) throw DimensionError("configuration covectors differ in size");
  }
  h.lifted_ = true;
  return h;
}

HyperplaneConfig HyperplaneConfig::subset(const std::vector<std::size_t>& idx) const {
  HyperplaneConfig h;
  h.lifted_ = lifted_;
  for (auto i : idx) h.cs_.push_back(cs_.at(i));
  return h;
}

HyperplaneConfig HyperplaneConfig::concat(const HyperplaneConfig& other) const {
  HyperplaneConfig h;
  h.lifted_ = true;
  h.cs_ = cs_;
  h.cs_.insert(h.cs_.end(), other.cs_.begin(), other.cs_.end());
  return h;
}

bool HyperplaneConfig::is_subconfiguration_of(const HyperplaneConfig& other, double tol) const {
  for (const auto& a : cs_) {
    bool found = false;
    for (const auto& b : other.cs_)
      if (a.size() == b.size() && std::min((a - b).norm(), (a + b).norm()) <= tol) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

bool Box::contains(const Vec& p, double slack) const {
  if (p.size() != lo.size()) throw DimensionError("point and box dimensions differ");
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) < lo(i) - slack || p(i) > hi(i) + slack) return false;
  return true;
}

bool Box::intersects(const Box& o, double slack) const {
  for (Eigen::Index i = 0; i < lo.size(); ++i)
    if (o.lo(i) > hi(i) + slack || lo(i) > o.hi(i) + slack) return false;
  return true;
}

// ------------------------------------------------------- R^4 form helpers

double wedge6(const Vec& w, const Vec& e) {
  return w(0) * e(5) + w(5) * e(0) - w(1) * e(4) - w(4) * e(1) + w(2) * e(3) + w(3) * e(2);
}

Vec wedge_uu(const Vec& u, const Vec& v) {
  Vec w(6);
  w << u(0) * v(1) - u(1) * v(0), u(0) * v(2) - u(2) * v(0), u(0) * v(3) - u(3) * v(0), u(1) * v(2) - u(2) * v(1),
      u(1) * v(3) - u(3) * v(1), u(2) * v(3) - u(3) * v(2);
  return w;
}

Vec wedge_u3(const Vec& u, const Vec& w) {
  // w layout: 01,02,03,12,13,23
  Vec t(4);
  t(0) = u(0) * w(3) - u(1) * w(1) + u(2) * w(0);  // 012
  t(1) = u(0) * w(4) - u(1) * w(2) + u(3) * w(0);  // 013
  t(2) = u(0) * w(5) - u(2) * w(2) + u(3) * w(1);  // 023
  t(3) = u(1) * w(5) - u(2) * w(4) + u(3) * w(3);  // 123
  return t;
}

double two_row_ratio(const Vec& a, const Vec& b) {
  double aa = a.squaredNorm(), bb = b.squaredNorm(), ab = a.dot(b);
  // Lagrange identity keeps |a ^ b| accurate when the rows nearly align
  double cross = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = i + 1; j < a.size(); ++j) {
      double m = a(i) * b(j) - a(j) * b(i);
      cross += m * m;
    }
  double half = 0.5 * (aa + bb);
  double disc = std::sqrt(std::max(0.0, 0.25 * (aa - bb) * (aa - bb) + ab * ab));
  double smax2 = half + disc;
  if (smax2 <= 0.0) return 0.0;
  return std::sqrt(cross) / smax2;
}

namespace {

Vec skew6(const Mat& s) {
  Vec v(6);
  v << s(0, 1), s(0, 2), s(0, 3), s(1, 2), s(1, 3), s(2, 3);
  return v;
}

bool sigma1_core(const Vec& u, double norm, const Vec& w1, const Vec& w2) {
  if (u.norm() <= kRankTolerance * norm) return true;
  return two_row_ratio(wedge_u3(u, w1), wedge_u3(u, w2)) <= kRankTolerance;
}

bool sigma2_core(const Vec& U, double n12, const Vec& w1, const Vec& w2) {
  double un = U.norm();
  if (un <= kRankTolerance * n12) return true;
  return std::abs(wedge6(U, w1)) <= kRankTolerance * un * w1.norm() &&
         std::abs(wedge6(U, w2)) <= kRankTolerance * un * w2.norm();
}

struct GramCheck {
  bool member = false;
  bool boundary = false;
};

GramCheck gram_sign(double g11, double g22, double g12, bool hyperbolic) {
  double scale = g11 * g11 + g22 * g22 + 2.0 * g12 * g12;
  if (scale == 0.0) return {};
  double d = g11 * g22 - g12 * g12;
  double q = std::abs(d) / scale;
  GramCheck c;
  c.boundary = q >= kRankTolerance / kBoundaryFactor && q <= kRankTolerance * kBoundaryFactor;
  c.member = q > kRankTolerance && (hyperbolic ? d < 0.0 : d > 0.0);
  return c;
}

void require_gram_member(const JetForms& F) {
  if (F.n != 6 || F.m != 2) throw DimensionError("singularity conditions need a jet of two forms on R^6");
  if (!relation_member(RelationId::hyp46(), F).member && !relation_member(RelationId::ell46(), F).member)
    throw Error("jet is in neither Hyp46 nor Ell46");
}

void require_member(const RelationId& id, const JetForms& F) {
  if (!relation_member(id, F).member) throw Error("jet is not in " + id.name());
}

}  // namespace

CompiledJet::CompiledJet(const JetForms& F) : F_(F) {
  if (F.n != 6 || F.m != 2) throw DimensionError("compiled jet needs two forms on R^6");
  Q_ = distribution_basis(F);
  for (int i = 0; i < 2; ++i) omega_[static_cast<std::size_t>(i)] = skew6(restrict_to(F.d(i), Q_).matrix());
}

GramPair CompiledJet::gram() const {
  return {wedge6(omega_[0], omega_[0]), wedge6(omega_[1], omega_[1]), wedge6(omega_[0], omega_[1])};
}

bool CompiledJet::sigma1(const Vec& u, double norm) const { return sigma1_core(u, norm, omega_[0], omega_[1]); }

bool CompiledJet::sigma2(const Vec& u1, double n1, const Vec& u2, double n2) const {
  return sigma2_core(wedge_uu(u1, u2), n1 * n2, omega_[0], omega_[1]);
}

// ------------------------------------------------------------ sigma sets

SigmaRoutes sigma1_routes(const JetForms& F, const Covector& lambda) {
  require_gram_member(F);
  SigmaRoutes r;
  Form base = Form::covector(F.values[0]).wedge(Form::covector(F.values[1])).wedge(Form::covector(lambda));
  double base_scale = F.values[0].norm() * F.values[1].norm() * lambda.norm();
  if (base.norm() <= kRankTolerance * base_scale) {
    r.wedge_route = true;
  } else {
    Mat rows(2, 6);
    for (int i = 0; i < 2; ++i) rows.row(i) = base.wedge(Form::two_form(F.d(i).matrix())).coefficients().transpose();
    r.wedge_route = numerical_rank(rows).rank < 2;
  }
  try {
    Mat a(2, 3);
    for (int i = 0; i < 2; ++i) {
      Restriction res = restrict_two_form_with_basis(F.d(i), {F.values[0], F.values[1], lambda});
      Mat s = res.form.matrix();
      a.row(i) << s(0, 1), s(0, 2), s(1, 2);
    }
    r.restriction_route = numerical_rank(a).rank < 2;
  } catch (const DependentCovectorsError&) {
    r.restriction_route = true;  // lambda vanishes on xi
  }
  return r;
}

bool sigma1_member(const JetForms& F, const Covector& lambda) { return sigma1_routes(F, lambda).wedge_route; }

SigmaRoutes sigma2_routes(const JetForms& F, const Covector& lambda1, const Covector& lambda2) {
  require_gram_member(F);
  SigmaRoutes r;
  Form a0 = Form::covector(F.values[0]), a1 = Form::covector(F.values[1]);
  Form four = a0.wedge(a1).wedge(Form::covector(lambda1)).wedge(Form::covector(lambda2));
  double four_scale = F.values[0].norm() * F.values[1].norm() * lambda1.norm() * lambda2.norm();
  if (four.norm() <= kRankTolerance * four_scale) {
    r.wedge_route = true;
  } else {
    bool all = true;
    for (int i = 0; i < 2; ++i) {
      Form dF = Form::two_form(F.d(i).matrix());
      all = all && std::abs(four.wedge(dF).top()) <= kRankTolerance * four.norm() * dF.norm();
    }
    r.wedge_route = all;
  }
  try {
    bool all = true;
    for (int i = 0; i < 2; ++i) {
      Restriction res = restrict_two_form_with_basis(F.d(i), {F.values[0], F.values[1], lambda1, lambda2});
      double c = res.form.matrix()(0, 1);
      all = all && std::abs(c) <= kRankTolerance * Form::two_form(F.d(i).matrix()).norm();
    }
    r.restriction_route = all;
  } catch (const DependentCovectorsError&) {
    r.restriction_route = true;
  }
  return r;
}

bool sigma2_member(const JetForms& F, const Covector& lambda1, const Covector& lambda2) {
  return sigma2_routes(F, lambda1, lambda2).wedge_route;
}

// --------------------------------------------------- compiled slice data

namespace {

// Pr_{lambda,F} for a Gram relation: omega_i(beta) = omega_i + u ^ Q^T beta_i.
struct GramSlice {
  CompiledJet jet;
  Vec u;

  GramSlice(const JetForms& F, const Covector& lambda) : jet(F), u(jet.restrict(lambda)) {}

  std::array<Vec, 2> forms(const Vec& params) const {
    std::array<Vec, 2> w;
    for (int i = 0; i < 2; ++i) {
      Vec b = jet.xi().transpose() * params.segment(6 * i, 6);
      w[static_cast<std::size_t>(i)] = jet.omega()[static_cast<std::size_t>(i)] + wedge_uu(u, b);
    }
    return w;
  }
};

double psi_image_rank(const GramSlice& s) {
  auto psi = [&](const Vec& p) {
    auto w = s.forms(p);
    Eigen::Vector3d g(wedge6(w[0], w[0]), wedge6(w[1], w[1]), wedge6(w[0], w[1]));
    return g;
  };
  CounterRng rng(0x9e3779b9ULL, 11);
  int best = 0;
  for (int trial = 0; trial < 2; ++trial) {
    Vec p0 = trial == 0 ? Vec::Zero(12) : rng.normal_vec(12);
    Mat J(3, 12);
    for (int j = 0; j < 12; ++j) {
      Vec e = Vec::Unit(12, j);
      J.col(j) = 0.5 * (psi(p0 + e) - psi(p0 - e));
    }
    best = std::max(best, J.isZero(0.0) ? 0 : numerical_rank(J).rank);
  }
  return best;
}

}  // namespace

SliceClassification first_avoidance_classify(const JetForms& F, const Covector& lambda, Flavor flavor) {
  const RelationId id = flavor == Flavor::Hyp ? RelationId::hyp46() : RelationId::ell46();
  MemberResult mr = relation_member(id, F);
  if (!mr.member) throw Error("jet is not in " + id.name());
  SliceClassification c;
  if (mr.boundary || is_degenerate(lambda)) return c;
  GramSlice slice(F, lambda);
  double q = slice.u.norm() / lambda.norm();
  if (q >= kRankTolerance / kBoundaryFactor && q <= kRankTolerance * kBoundaryFactor) return c;
  c.aux["psi_image_dim"] = psi_image_rank(slice);
  const bool annihilates = q <= kRankTolerance;
  if (flavor == Flavor::Hyp) {
    bool s1 = sigma1_member(F, lambda);
    c.aux["sigma1"] = s1 ? 1.0 : 0.0;
    if (annihilates) {
      c.tag = CaseTag::HypTrivial;
      c.verdict = VerdictKind::TriviallyAmpleFull;
    } else if (s1) {
      c.tag = CaseTag::HypNonAmple;
      c.verdict = VerdictKind::NonAmpleWitnessed;
      c.complement_codim = 1;
    } else {
      c.tag = CaseTag::HypNontrivial;
      c.verdict = VerdictKind::AmpleWitnessed;
      c.complement_codim = 0;
    }
  } else {
    if (annihilates) {
      c.tag = CaseTag::EllTrivial;
      c.verdict = VerdictKind::TriviallyAmpleFull;
    } else {
      c.tag = CaseTag::EllNonAmple;
      c.verdict = VerdictKind::NonAmpleWitnessed;
      c.complement_codim = c.aux["psi_image_dim"] == 2.0 ? 1 : 0;
    }
  }
  return c;
}

TemplateVerdict template_A_member(const JetForms& F, const HyperplaneConfig& config) {
  if (F.n != 6 || F.m != 2) return {false, "shape is not (6,2)"};
  MemberResult mr = relation_member(RelationId::hyp46(), F);
  if (!mr.member || mr.boundary) return {false, "not hyperbolic"};
  if (!config.empty() && config.dim() != 6) return {false, "configuration dimension is not 6"};
  CompiledJet cj(F);
  std::vector<Vec> u;
  for (const auto& c : config.covectors()) u.push_back(cj.restrict(c));
  for (std::size_t i = 0; i < u.size(); ++i)
    if (cj.sigma1(u[i], config[i].norm())) return {false, "sigma1(" + std::to_string(i) + ")"};
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j)
      if (cj.sigma2(u[i], config[i].norm(), u[j], config[j].norm()))
        return {false, "sigma2(" + std::to_string(i) + "," + std::to_string(j) + ")"};
  return {true, ""};
}

std::string TemplateId::name() const {
  switch (kind) {
    case Kind::Hyp46Template: return "Hyp46Template";
    case Kind::FullTemplate: return "FullTemplate(" + relation.name() + ")";
    case Kind::Synthetic:
      return "Synthetic(" + relation.name() + ",min_size=" + std::to_string(min_config_size) + ")";
  }
  return "?";
}

TemplateVerdict template_member(const TemplateId& t, const JetForms& F, const HyperplaneConfig& config) {
  if (t.kind == TemplateId::Kind::Hyp46Template) return template_A_member(F, config);
  if (F.n != t.relation.n || F.m != t.relation.forms()) return {false, "shape mismatch"};
  MemberResult mr = relation_member(t.relation, F);
  if (!mr.member || mr.boundary) return {false, "not in " + t.relation.name()};
  if (t.kind == TemplateId::Kind::Synthetic && static_cast<int>(config.size()) < t.min_config_size)
    return {false, "configuration too small"};
  return {true, ""};
}

namespace {

// Loci of Sigma1(nu) inside a Gram slice: the 2x2 minors of the rows
// u_nu ^ omega_i(beta).
PolynomialLocus sigma1_locus(std::shared_ptr<const GramSlice> s, const Vec& v) {
  PolynomialLocus L;
  L.degree = 2;
  L.label = "sigma1";
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      L.polys.push_back([s, v, a, b](const Vec& p) {
        auto w = s->forms(p);
        Vec r1 = wedge_u3(v, w[0]), r2 = wedge_u3(v, w[1]);
        return r1(a) * r2(b) - r1(b) * r2(a);
      });
  return L;
}

PolynomialLocus sigma2_locus(std::shared_ptr<const GramSlice> s, const Vec& U) {
  PolynomialLocus L;
  L.degree = 1;
  L.label = "sigma2";
  for (int i = 0; i < 2; ++i)
    L.polys.push_back([s, U, i](const Vec& p) { return wedge6(U, s->forms(p)[static_cast<std::size_t>(i)]); });
  return L;
}

PolynomialLocus det_locus(std::shared_ptr<const GramSlice> s) {
  PolynomialLocus L;
  L.degree = 2;
  L.label = "degenerate gram";
  L.polys.push_back([s](const Vec& p) {
    auto w = s->forms(p);
    double g11 = wedge6(w[0], w[0]), g22 = wedge6(w[1], w[1]), g12 = wedge6(w[0], w[1]);
    return g11 * g22 - g12 * g12;
  });
  return L;
}

}  // namespace

SampledSet template_slice(const TemplateId& t, const JetForms& F, const HyperplaneConfig& config,
                          const Covector& lambda) {
  if (t.kind != TemplateId::Kind::Hyp46Template) {
    SampledSet s = slice_set(t.relation, PrincipalSlice{F, lambda});
    if (t.kind == TemplateId::Kind::Synthetic && static_cast<int>(config.size()) < t.min_config_size)
      s.member = [](const Vec&) { return false; };
    return s;
  }
  auto slice = std::make_shared<const GramSlice>(F, lambda);
  std::vector<Vec> us;
  std::vector<double> norms;
  for (const auto& c : config.covectors()) {
    us.push_back(slice->jet.restrict(c));
    norms.push_back(c.norm());
  }
  std::vector<Vec> pairs;
  std::vector<double> pair_norms;
  for (std::size_t i = 0; i < us.size(); ++i)
    for (std::size_t j = i + 1; j < us.size(); ++j) {
      pairs.push_back(wedge_uu(us[i], us[j]));
      pair_norms.push_back(norms[i] * norms[j]);
    }
  SampledSet s;
  s.dim = 12;
  s.member = [slice, us, norms, pairs, pair_norms](const Vec& p) {
    auto w = slice->forms(p);
    GramCheck g = gram_sign(wedge6(w[0], w[0]), wedge6(w[1], w[1]), wedge6(w[0], w[1]), true);
    if (!g.member || g.boundary) return false;
    for (std::size_t i = 0; i < us.size(); ++i)
      if (sigma1_core(us[i], norms[i], w[0], w[1])) return false;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (sigma2_core(pairs[k], pair_norms[k], w[0], w[1])) return false;
    return true;
  };
  s.loci.push_back(det_locus(slice));
  for (const auto& v : us) s.loci.push_back(sigma1_locus(slice, v));
  for (const auto& U : pairs) s.loci.push_back(sigma2_locus(slice, U));
  return s;
}

StepReport second_third_step_classify(const JetForms& F, const Covector& lambda, const Covector& nu1,
                                      const Covector& nu2) {
  require_member(RelationId::hyp46(), F);
  CompiledJet cj(F);
  const Vec u = cj.restrict(lambda), v1 = cj.restrict(nu1), v2 = cj.restrict(nu2);
  const double nl = lambda.norm(), n1 = nu1.norm(), n2 = nu2.norm();
  StepReport r;

  if (wedge_uu(u, v1).norm() <= kRankTolerance * nl * n1) {
    // the slice does not move the restrictions to xi ∩ ker nu1
    if (cj.sigma1(v1, n1)) r.sigma1_codim = 0;
  } else if (cj.sigma2(u, nl, v1, n1)) {
    r.sigma1_codim = 1;
    r.gl2_reduction = true;
  } else {
    r.sigma1_codim = 2;
  }

  if (wedge_uu(v1, v2).norm() <= kRankTolerance * n1 * n2) {
    r.sigma2_codim = 0;
  } else {
    Mat rows(3, 4);
    rows.row(0) = v1.transpose();
    rows.row(1) = v2.transpose();
    rows.row(2) = u.transpose();
    if (numerical_rank(rows).rank < 3) {
      if (cj.sigma2(v1, n1, v2, n2)) r.sigma2_codim = 0;
    } else {
      r.sigma2_codim = 2;
    }
  }
  return r;
}

Complement sigma1_slice_complement(const JetForms& F, const Covector& lambda, const Covector& nu) {
  require_member(RelationId::hyp46(), F);
  auto slice = std::make_shared<const GramSlice>(F, lambda);
  Complement c;
  c.dim = 12;
  c.loci.push_back(sigma1_locus(slice, slice->jet.restrict(nu)));
  return c;
}

Complement sigma2_slice_complement(const JetForms& F, const Covector& lambda, const Covector& nu1,
                                   const Covector& nu2) {
  require_member(RelationId::hyp46(), F);
  auto slice = std::make_shared<const GramSlice>(F, lambda);
  Complement c;
  c.dim = 12;
  c.loci.push_back(sigma2_locus(slice, wedge_uu(slice->jet.restrict(nu1), slice->jet.restrict(nu2))));
  return c;
}

// ---------------------------------------------------------- Avoid^l

const char* to_string(Tri t) {
  switch (t) {
    case Tri::Member: return "Member";
    case Tri::NonMember: return "NonMember";
    case Tri::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

using MemoKey = std::vector<double>;

std::mutex g_memo_mutex;
std::map<MemoKey, AvoidResult> g_memo;

MemoKey memo_key(const RelationId& id, const JetForms& F, const HyperplaneConfig& cfg, int level,
                 const AvoidConfig& ac) {
  MemoKey k{static_cast<double>(id.tag),
            static_cast<double>(id.k),
            static_cast<double>(id.n),
            static_cast<double>(level),
            ac.locus_engine ? 1.0 : 0.0,
            static_cast<double>(ac.mc.seed >> 32),
            static_cast<double>(ac.mc.seed & 0xffffffffULL),
            static_cast<double>(ac.mc.resolved_samples(slice_dim(id))),
            static_cast<double>(cfg.size())};
  for (const auto& v : F.values) k.insert(k.end(), v.data(), v.data() + v.size());
  for (const auto& d : F.derivs) k.insert(k.end(), d.data(), d.data() + d.size());
  for (const auto& c : cfg.covectors()) k.insert(k.end(), c.data(), c.data() + c.size());
  return k;
}

// Removed set of the one-dimensional-fibre iteration: a union of affine
// subspaces of the zero-jet space.
struct AffinePiece {
  Vec point;
  Mat dirs;  // orthonormal columns
  int level = 0;
  int by = -1;
};

bool piece_contains(const AffinePiece& s, const Vec& v) {
  Vec r = v - s.point;
  if (s.dirs.cols() > 0) r -= s.dirs * (s.dirs.transpose() * r);
  // the closure band: boundary cases count as removed
  return r.norm() <= kRankTolerance * kBoundaryFactor * std::max(1.0, v.norm());
}

bool same_piece(const AffinePiece& a, const AffinePiece& b) {
  if (a.dirs.cols() != b.dirs.cols()) return false;
  if (!piece_contains(a, b.point)) return false;
  if (a.dirs.cols() == 0) return true;
  Mat d = b.dirs - a.dirs * (a.dirs.transpose() * b.dirs);
  return d.norm() <= 1e-9;
}

AvoidResult locus_engine(const JetForms& F, const HyperplaneConfig& cfg, int level) {
  const int n = F.n;
  std::vector<AffinePiece> pieces{{Vec::Zero(n), Mat(n, 0), 0, -1}};
  std::vector<AffinePiece> frontier = pieces;
  for (int l = 1; l <= level; ++l) {
    std::vector<AffinePiece> next;
    for (const auto& s : frontier) {
      for (std::size_t t = 0; t < cfg.size(); ++t) {
        const Vec& tau = cfg[t];
        Vec off = tau;
        if (s.dirs.cols() > 0) off -= s.dirs * (s.dirs.transpose() * tau);
        if (off.norm() <= 1e-9 * tau.norm()) continue;  // tau-lines stay inside s
        Mat d(n, s.dirs.cols() + 1);
        d << s.dirs, off.normalized();
        AffinePiece p{s.point, orthonormal_span(d), l, static_cast<int>(t)};
        bool dup = false;
        for (const auto& q : pieces)
          if (same_piece(q, p)) {
            dup = true;
            break;
          }
        if (!dup) {
          pieces.push_back(p);
          next.push_back(p);
        }
      }
    }
    frontier = std::move(next);
  }
  AvoidResult r;
  r.verdict = Tri::Member;
  for (const auto& s : pieces)
    if (piece_contains(s, F.values[0]) && (r.verdict == Tri::Member || s.level < r.removed_at_level)) {
      r.verdict = Tri::NonMember;
      r.removed_at_level = s.level;
      r.removed_by = s.by;
    }
  return r;
}

AvoidResult avoid_rec(const RelationId& id, const JetForms& F, const HyperplaneConfig& cfg, int level,
                      const AvoidConfig& ac);

AvoidResult avoid_uncached(const RelationId& id, const JetForms& F, const HyperplaneConfig& cfg, int level,
                           const AvoidConfig& ac) {
  if (id.tag == RelationTag::NoCriticalPoints && ac.locus_engine) return locus_engine(F, cfg, level);
  AvoidResult r;
  if (level == 0) {
    MemberResult m = relation_member(id, F);
    if (m.member && !m.boundary) {
      r.verdict = Tri::Member;
    } else {
      r.verdict = Tri::NonMember;
      r.removed_at_level = 0;
    }
    return r;
  }
  AvoidResult prev = avoid_rec(id, F, cfg, level - 1, ac);
  if (prev.verdict != Tri::Member) return prev;
  for (std::size_t t = 0; t < cfg.size(); ++t) {
    const Covector tau = cfg[t];
    std::atomic<bool> unsure{false};
    SampledSet s;
    s.dim = slice_dim(id);
    s.member = [&, tau](const Vec& p) {
      AvoidResult inner = avoid_rec(id, slice_point(id, F, tau, p), cfg, level - 1, ac);
      if (inner.verdict == Tri::Inconclusive) unsure = true;
      return inner.verdict == Tri::Member;
    };
    s.loci = complement_polynomials(id, PrincipalSlice{F, tau});
    AmplenessConfig mc = ac.mc;
    mc.seed = CounterRng::mix(ac.mc.seed, static_cast<std::uint64_t>(level) * 1024 + t);
    mc.center.reset();
    AmplenessVerdict v = ampleness_test(s, mc);
    if (unsure || v.kind == VerdictKind::Inconclusive) {
      r.verdict = Tri::Inconclusive;
      r.removed_by = static_cast<int>(t);
      return r;
    }
    if (v.kind == VerdictKind::NonAmpleWitnessed || v.kind == VerdictKind::TriviallyAmpleEmpty) {
      r.verdict = Tri::NonMember;
      r.removed_at_level = level;
      r.removed_by = static_cast<int>(t);
      return r;
    }
  }
  r.verdict = Tri::Member;
  return r;
}

AvoidResult avoid_rec(const RelationId& id, const JetForms& F, const HyperplaneConfig& cfg, int level,
                      const AvoidConfig& ac) {
  MemoKey key = memo_key(id, F, cfg, level, ac);
  {
    std::lock_guard<std::mutex> lock(g_memo_mutex);
    auto it = g_memo.find(key);
    if (it != g_memo.end()) return it->second;
  }
  AvoidResult r = avoid_uncached(id, F, cfg, level, ac);
  std::lock_guard<std::mutex> lock(g_memo_mutex);
  g_memo[key] = r;
  return r;
}

}  // namespace

AvoidResult avoid_iterate(const RelationId& relation, const JetForms& F, const HyperplaneConfig& config, int level,
                          const AvoidConfig& cfg) {
  if (level < 0 || level > kMaxAvoidLevel) throw Error("avoidance level must lie in [0, 3]");
  F.validate();
  if (F.n != relation.n || F.m != relation.forms()) throw DimensionError("jet shape does not match " + relation.name());
  if (!config.empty() && config.dim() != relation.n) throw DimensionError("configuration dimension mismatch");
  return avoid_rec(relation, F, config, level, cfg);
}

void clear_avoid_memo() {
  std::lock_guard<std::mutex> lock(g_memo_mutex);
  g_memo.clear();
}

std::size_t avoid_memo_size() {
  std::lock_guard<std::mutex> lock(g_memo_mutex);
  return g_memo.size();
}

bool avoidance_relation_member(const TemplateId& t, const std::vector<CoverFrame>& cover, const JetForms& F,
                               const Vec& p) {
  HyperplaneConfig cmax = HyperplaneConfig::lifted({});
  bool inside = false;
  for (const auto& c : cover) {
    if (!c.support.contains(p)) continue;
    inside = true;
    cmax = cmax.concat(c.frame);
  }
  if (!inside) throw Error("point lies outside every support");
  return template_member(t, F, cmax).member;
}

// ----------------------------------------------------------- sampling

JetForms random_jet(CounterRng& rng, int n, int m) {
  JetForms F = JetForms::zero(n, m);
  for (int i = 0; i < m; ++i) F.values[static_cast<std::size_t>(i)] = rng.normal_vec(n);
  for (int i = 0; i < m; ++i)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) F.derivs[static_cast<std::size_t>(i)](a, b) = rng.normal();
  return F;
}

JetForms random_member(CounterRng& rng, const RelationId& id) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    JetForms F = random_jet(rng, id.n, id.forms());
    MemberResult m = relation_member(id, F);
    if (m.member && !m.boundary) return F;
  }
  throw Error("could not draw a member of " + id.name());
}

HyperplaneConfig random_config(CounterRng& rng, int n, int size) {
  std::vector<Covector> cs;
  for (int i = 0; i < size; ++i) cs.push_back(rng.normal_vec(n));
  return HyperplaneConfig::strict(cs);
}

JetConfigSampler relation_sampler(const RelationId& id, int max_size) {
  if (max_size < 1) throw Error("configuration size bound must be positive");
  return [id, max_size](CounterRng& rng) {
    JetForms F = random_member(rng, id);
    int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_size)));
    return std::make_pair(F, random_config(rng, id.n, size));
  };
}

double TemplateReport::prop2_conclusive_fraction() const {
  if (prop2_slices == 0) return 1.0;
  return static_cast<double>(prop2_slices - prop2_inconclusive) / prop2_slices;
}

namespace {

std::pair<JetForms, HyperplaneConfig> draw_sample(const JetConfigSampler& sampler, const TemplateCheckConfig& cfg,
                                                  int index, CounterRng& rng) {
  rng = make_rng(cfg.seed, Stream::Template).split(static_cast<std::uint64_t>(index));
  return sampler(rng);
}

}  // namespace

SampleOutcome template_sample_outcome(const TemplateId& t, const JetConfigSampler& sampler,
                                      const TemplateCheckConfig& cfg, int index) {
  CounterRng rng(0, 0);
  auto [F, xi] = draw_sample(sampler, cfg, index, rng);
  SampleOutcome out;
  out.in_template = template_member(t, F, xi).member;
  if (!out.in_template) return out;
  for (int s = 0; s < cfg.subconfigs && out.prop1; ++s) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < xi.size(); ++i)
      if (rng.below(2) == 1) idx.push_back(i);
    if (!template_member(t, F, xi.subset(idx)).member) {
      out.prop1 = false;
      std::string d = "subconfiguration {";
      for (std::size_t k = 0; k < idx.size(); ++k) d += (k ? "," : "") + std::to_string(idx[k]);
      out.prop1_detail = d + "} left the template";
    }
  }
  if (cfg.property_two) {
    for (std::size_t j = 0; j < xi.size(); ++j) {
      SampledSet s = template_slice(t, F, xi, xi[j]);
      AmplenessConfig mc = cfg.mc;
      mc.seed = CounterRng::mix(cfg.seed, static_cast<std::uint64_t>(index) * 64 + j);
      mc.center.reset();
      mc.parallel = false;
      out.prop2.push_back(ampleness_test(s, mc).kind);
    }
  }
  return out;
}

TemplateReport template_properties_check(const TemplateId& t, const JetConfigSampler& sampler,
                                         const TemplateCheckConfig& cfg) {
  if (cfg.n_samples < 1) throw Error("template check needs at least one sample");
  auto outcomes = kernels::index_map<SampleOutcome>(
      static_cast<std::size_t>(cfg.n_samples),
      [&](std::size_t i) { return template_sample_outcome(t, sampler, cfg, static_cast<int>(i)); },
      kernels::mode_of(cfg.parallel));
  TemplateReport r;
  r.template_name = t.name();
  r.seed = cfg.seed;
  r.samples = cfg.n_samples;
  r.subconfigs = cfg.subconfigs;
  constexpr std::size_t kMaxExemplars = 10;
  std::map<std::string, std::size_t> per_kind;
  auto exemplar = [&](int i, const std::string& prop, const std::string& detail) {
    if (per_kind[prop]++ >= kMaxExemplars) return;
    CounterRng rng(0, 0);
    auto [F, xi] = draw_sample(sampler, cfg, i, rng);
    r.exemplars.push_back({i, prop, detail, F, xi});
  };
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    const int idx = static_cast<int>(i);
    if (!o.in_template) {
      ++r.prop3_fail;
      exemplar(idx, "III", "sample outside the template");
      continue;
    }
    ++r.prop3_pass;
    if (o.prop1) {
      ++r.prop1_pass;
    } else {
      ++r.prop1_fail;
      exemplar(idx, "I", o.prop1_detail);
    }
    if (!cfg.property_two) continue;
    bool bad = false;
    for (std::size_t j = 0; j < o.prop2.size(); ++j) {
      ++r.prop2_slices;
      switch (o.prop2[j]) {
        case VerdictKind::NonAmpleWitnessed:
          ++r.prop2_nonample;
          if (!bad) exemplar(idx, "II", "slice along covector " + std::to_string(j) + " is not ample");
          bad = true;
          break;
        case VerdictKind::Inconclusive: ++r.prop2_inconclusive; break;
        default: ++r.prop2_ample; break;
      }
    }
    if (bad) ++r.prop2_fail;
    else ++r.prop2_pass;
  }
  return r;
}

}  // namespace amplex
