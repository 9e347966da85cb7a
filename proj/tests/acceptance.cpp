// Acceptance run: one line per criterion, nonzero exit if any fails.

#include "amplex/avoidance.hpp"
#include "amplex/jiggling.hpp"
#include "amplex/relations.hpp"
#include "amplex/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace amplex;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = false;
  std::string detail;
};

int g_failed = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  bool in_time = secs < limit_s;
  bool pass = o.ok && in_time;
  if (!pass) ++g_failed;
  std::printf("[%s] %2d %-28s %s | %.4g s (limit %g s%s)\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
              limit_s, in_time ? "" : ", exceeded");
  std::fflush(stdout);
}

std::string str(std::ostringstream& os) { return os.str(); }

Vec e(int n, int i) { return Vec::Unit(n, i); }

// rank of the curvature rows restricted to ker(values, lambda), by SVD
int step2_l_oracle(const JetForms& F, const Vec& lambda) {
  const int n = F.n;
  Mat A(F.m + 1, n);
  for (int i = 0; i < F.m; ++i) A.row(i) = F.values[static_cast<std::size_t>(i)].transpose();
  A.row(F.m) = lambda.transpose();
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const int d = n - F.m - 1;
  Mat K = svd.matrixV().rightCols(d);
  Mat rows(F.m, d * (d - 1) / 2);
  for (int i = 0; i < F.m; ++i) {
    Mat r = K.transpose() * F.d(i).matrix() * K;
    int c = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) rows(i, c++) = r(a, b);
  }
  Eigen::JacobiSVD<Mat> s(rows);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.singularValues().size(); ++i)
    if (s.singularValues()(i) > 1e-9 * s.singularValues()(0)) ++rank;
  return rank;
}

// kernel line of dF restricted to ker(alpha), in R^4
Vec even_contact_kernel(const JetForms& F) {
  Mat A = F.values[0].transpose();
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  Mat Q = svd.matrixV().rightCols(3);
  Mat r = Q.transpose() * F.d(0).matrix() * Q;
  Eigen::JacobiSVD<Mat> s(r, Eigen::ComputeFullV);
  return Q * s.matrixV().col(2);
}

Outcome c1() {
  auto t0 = Clock::now();
  Signature s = wedge_signature(4);
  double us = std::chrono::duration<double, std::micro>(Clock::now() - t0).count();
  std::ostringstream os;
  os << "signature (" << s.positive << "," << s.negative << "), zero " << s.zero << ", call " << us << " us";
  return {s.positive == 3 && s.negative == 3 && s.zero == 0 && us < 1000.0, str(os)};
}

Outcome c2() {
  CounterRng rng(20240102, 0);
  int bad = 0, total = 0;
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    int n = 2 + t % 3;
    Mat M = Mat::NullaryExpr(n, n, [&] { return rng.normal(); });
    double det = M.determinant();
    if (std::abs(det) < 1e-6) continue;
    ++total;
    int target = det > 0 ? -1 : 1;
    auto w = gl_ample_witness(M, target);
    Mat sum = Mat::Zero(n, n);
    double wsum = 0;
    bool signs = !w.empty();
    for (const auto& [a, P] : w) {
      sum += a * P;
      wsum += a;
      signs = signs && a >= 0 && P.determinant() * target > 0;
    }
    double err = std::max((sum - M).cwiseAbs().maxCoeff(), std::abs(wsum - 1.0));
    worst = std::max(worst, err);
    if (!signs || err > 1e-10) ++bad;
  }
  std::ostringstream os;
  os << total << " matrices, " << bad << " bad, worst reconstruction " << worst;
  return {bad == 0 && total >= 990, str(os)};
}

Outcome c3() {
  const RelationId id = RelationId::exact_forms3();
  // constructed witnesses for the three tags
  JetForms F0 = *named_jet("exact3");
  Mat a = Mat::Zero(3, 3), b = Mat::Zero(3, 3);
  a(0, 1) = 1, a(1, 0) = -1, b(1, 2) = 1, b(2, 1) = -1;
  JetForms G = jet_with_forms({Vec::Zero(3), Vec::Zero(3)}, {a, b});
  bool tags = exact_forms_classify(F0, e(3, 0)).tag == CaseTag::GL2Case &&
              exact_forms_classify(F0, e(3, 2)).tag == CaseTag::MixedThin &&
              exact_forms_classify(G, Vec::Ones(3)).tag == CaseTag::TransverseThin;

  CounterRng rng = make_rng(3, Stream::Jets);
  int agree = 0, contradictions = 0, inconclusive = 0;
  const int N = 500;
  for (int t = 0; t < N; ++t) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(t));
    JetForms F = random_member(r, id);
    Vec lam = r.normal_vec(3);
    SliceClassification c = exact_forms_classify(F, lam);
    PrincipalSlice slice{F, lam};
    AmplenessConfig mc;
    mc.seed = static_cast<std::uint64_t>(t);
    AmplenessVerdict v = ampleness_test(slice_set(id, slice), mc);
    bool ok = true;
    if (is_conclusive(v.kind) && is_conclusive(c.verdict) && is_ample(v.kind) != is_ample(c.verdict)) {
      ok = false;
      ++contradictions;
    }
    if (!is_conclusive(v.kind)) ++inconclusive;
    if (c.complement_codim && *c.complement_codim >= 1) {
      CrossingConfig cc;
      cc.seed = static_cast<std::uint64_t>(t);
      int probe = line_crossing_probe(slice_complement(id, slice), cc);
      if (probe != std::min(*c.complement_codim, 2)) ok = false;
    }
    if (ok) ++agree;
  }
  std::ostringstream os;
  os << agree << "/" << N << " agree, " << contradictions << " contradictory, " << inconclusive
     << " inconclusive, witness tags " << (tags ? "ok" : "missing");
  return {tags && agree >= 0.95 * N, str(os)};
}

Outcome c4() {
  int bad = 0, matrix = 0;
  CounterRng rng = make_rng(4, Stream::Jets);
  std::ostringstream os;
  for (auto [k, n] : {std::pair{3, 5}, {3, 6}, {4, 6}}) {
    RelationId id = RelationId::step2(k, n);
    for (int t = 0; t < 500; ++t) {
      CounterRng r = rng.split(static_cast<std::uint64_t>(n * 10000 + k * 1000 + t));
      JetForms F = random_member(r, id);
      Vec lam = r.normal_vec(n);
      SliceClassification c = step2_classify(F, k, n, lam);
      if (c.tag != CaseTag::MatrixCase) {
        ++bad;
        continue;
      }
      ++matrix;
      int l = step2_l_oracle(F, lam);
      if (static_cast<int>(c.aux.at("l")) != l || is_ample(c.verdict) != (n - k - l <= k - 1)) ++bad;
    }
    // annihilator: lambda in the span of the values
    for (int t = 0; t < 20; ++t) {
      CounterRng r = rng.split(static_cast<std::uint64_t>(900000 + n * 100 + k * 10 + t));
      JetForms F = random_member(r, id);
      Vec lam = r.normal() * F.values[0] + r.normal() * F.values.back();
      if (step2_classify(F, k, n, lam).verdict != VerdictKind::TriviallyAmpleFull) ++bad;
    }
  }
  os << matrix << " matrix cases over 3 shapes, " << bad << " mismatches";
  return {bad == 0, str(os)};
}

Outcome c5() {
  CounterRng rng = make_rng(5, Stream::Jets);
  int odd_ok = 0, even_ok = 0;
  for (int t = 0; t < 300; ++t) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(t));
    JetForms F = random_member(r, RelationId::contact(3));
    Vec lam = r.normal_vec(3);
    SliceClassification c = contact_classify(F, 3, lam);
    bool ok = c.tag == CaseTag::Case2 && c.verdict == VerdictKind::NonAmpleWitnessed && c.complement_codim == 1 &&
              c.aux_vector.size() == 3 && c.aux_vector.norm() > 1e-9;
    if (ok) {
      // the complement is the affine hyperplane g . beta = -offset
      PrincipalSlice slice{F, lam};
      Vec g = c.aux_vector;
      Vec on = -c.aux.at("offset") * g / g.squaredNorm();
      Vec off = on + 0.5 * g / g.norm();
      ok = !relation_member(RelationId::contact(3), slice.at_params(on)).member &&
           relation_member(RelationId::contact(3), slice.at_params(off)).member;
    }
    if (ok) ++odd_ok;
  }
  for (int t = 0; t < 300; ++t) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(100000 + t));
    JetForms F = random_member(r, RelationId::even_contact(4));
    Vec L = even_contact_kernel(F);
    Vec lam = r.normal_vec(4);
    lam -= (lam.dot(L) / L.squaredNorm()) * L;
    SliceClassification c = contact_classify(F, 4, lam);
    if (c.tag != CaseTag::Case3a || c.complement_codim != 2) continue;
    CrossingConfig cc;
    cc.seed = static_cast<std::uint64_t>(t);
    if (line_crossing_probe(slice_complement(RelationId::even_contact(4), PrincipalSlice{F, lam}), cc) == 2) ++even_ok;
  }
  std::ostringstream os;
  os << "contact n=3 non-ample hyperplane " << odd_ok << "/300, even n=4 case 3a codim 2 " << even_ok << "/300";
  return {odd_ok == 300 && even_ok == 300, str(os)};
}

Outcome c6() {
  int empty = 0, total = 0;
  CounterRng rng = make_rng(6, Stream::Jets);
  for (int n : {2, 3}) {
    std::vector<Covector> basis;
    for (int i = 0; i < n; ++i) basis.push_back(e(n, i));
    HyperplaneConfig xi = HyperplaneConfig::strict(basis);
    for (int t = 0; t < 100; ++t) {
      CounterRng r = rng.split(static_cast<std::uint64_t>(n * 1000 + t));
      JetForms F = random_member(r, RelationId::no_critical_points(n));
      AvoidConfig cfg;
      cfg.mc.seed = static_cast<std::uint64_t>(t);
      ++total;
      if (avoid_iterate(RelationId::no_critical_points(n), F, xi, n, cfg).verdict == Tri::NonMember) ++empty;
    }
    clear_avoid_memo();
  }
  std::ostringstream os;
  os << empty << "/" << total << " jets removed at level n";
  return {empty == total, str(os)};
}

Outcome c7() {
  JetForms H = *named_jet("hyp_a1b1");
  bool witnesses = first_avoidance_classify(H, e(6, 0) + e(6, 2), Flavor::Hyp).tag == CaseTag::HypNontrivial &&
                   first_avoidance_classify(H, e(6, 4), Flavor::Hyp).tag == CaseTag::HypTrivial &&
                   first_avoidance_classify(H, e(6, 0), Flavor::Hyp).tag == CaseTag::HypNonAmple;
  CounterRng rng = make_rng(7, Stream::Jets);
  int generic = 0, generic_ok = 0;
  for (int f = 0; f < 3; ++f) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(f));
    JetForms F = random_member(r, RelationId::hyp46());
    for (int t = 0; t < 10000; ++t) {
      ++generic;
      if (first_avoidance_classify(F, r.normal_vec(6), Flavor::Hyp).tag == CaseTag::HypNontrivial) ++generic_ok;
    }
  }
  int ell_ok = 0;
  CounterRng r = rng.split(99);
  JetForms E = random_member(r, RelationId::ell46());
  for (int t = 0; t < 1000; ++t) {
    auto c = first_avoidance_classify(E, r.normal_vec(6), Flavor::Ell);
    if (c.verdict == VerdictKind::NonAmpleWitnessed) ++ell_ok;
  }
  std::ostringstream os;
  os << "witnesses " << (witnesses ? "(i)/(ii)/(iii)" : "wrong") << ", generic case (i) " << generic_ok << "/"
     << generic << ", elliptic non-ample " << ell_ok << "/1000";
  return {witnesses && generic_ok == generic && ell_ok == 1000, str(os)};
}

Outcome c8() {
  TemplateCheckConfig cfg;
  cfg.n_samples = 200;
  cfg.seed = 8;
  TemplateReport rep = template_properties_check(TemplateId::hyp46(), relation_sampler(RelationId::hyp46(), 6), cfg);
  double frac = rep.prop2_conclusive_fraction();

  CounterRng rng = make_rng(8, Stream::Jets);
  int checked = 0, match = 0;
  JetForms model = *named_jet("hyp_a13b24");
  for (int t = 0; t < 200; ++t) {
    CounterRng r = rng.split(static_cast<std::uint64_t>(t));
    JetForms F;
    Vec lam, nu1, nu2 = r.normal_vec(6);
    if (t % 2 == 0) {
      F = random_member(r, RelationId::hyp46());
      lam = r.normal_vec(6);
      nu1 = r.normal_vec(6);
    } else {
      // lambda, nu1 inside span(dx1, dx2) modulo the values: a Sigma2 pair
      F = model;
      lam = r.normal() * e(6, 0) + r.normal() * e(6, 1) + r.normal() * e(6, 4);
      nu1 = r.normal() * e(6, 0) + r.normal() * e(6, 1) + r.normal() * e(6, 5);
    }
    StepReport s = second_third_step_classify(F, lam, nu1, nu2);
    bool ok = true;
    CrossingConfig cc;
    cc.seed = static_cast<std::uint64_t>(t);
    if (s.sigma1_codim && *s.sigma1_codim >= 1) {
      ++checked;
      ok = line_crossing_probe(sigma1_slice_complement(F, lam, nu1), cc) == std::min(*s.sigma1_codim, 2);
    }
    if (ok && s.sigma2_codim && *s.sigma2_codim >= 1) {
      ok = line_crossing_probe(sigma2_slice_complement(F, lam, nu1, nu2), cc) == std::min(*s.sigma2_codim, 2);
    }
    if (ok) ++match;
  }
  std::ostringstream os;
  os << "I fail " << rep.prop1_fail << ", III fail " << rep.prop3_fail << ", II non-ample " << rep.prop2_nonample
     << " over " << rep.prop2_slices << " slices, conclusive " << frac << "; step codim vs probe " << match
     << "/200 (" << checked << " sigma1 probes)";
  return {rep.prop1_fail == 0 && rep.prop3_fail == 0 && rep.prop2_nonample == 0 && frac >= 0.9 && match == 200,
          str(os)};
}

Outcome c9() {
  auto chart = [](int n) {
    std::vector<Covector> basis;
    for (int i = 0; i < n; ++i) basis.push_back(e(n, i));
    return Chart{Box{Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)}, Vec::Zero(n), HyperplaneConfig::strict(basis)};
  };
  std::ostringstream os;
  bool ok = true;
  {
    CubicalCover cov = subdivide_cover({chart(2)}, 2, 1.5);
    Oracle o = angle_oracle(0.05, 0.1, 0.02);
    JiggleConfig cfg;
    cfg.seed = 9;
    JetForms F = JetForms::zero(2, 1);
    JiggleResult r = jiggle(cov, o, F, cfg);
    VerifyReport v = verify_jiggle(r, cov, o, F, 3);
    bool pass = v.failed == 0 && v.schedule_ok && r.total_sup <= 2 * cfg.eps0;
    ok = ok && pass;
    os << "2-D angle: " << v.passed << "/" << v.probes << " probes, sup " << r.total_sup;
  }
  {
    CubicalCover cov = subdivide_cover({chart(6)}, 2, 1.5);
    JetForms F = *named_jet("hyp_a1b1");
    JiggleConfig cfg;
    cfg.seed = 9;
    cfg.probes_per_axis = 2;
    JiggleResult r = jiggle(cov, hyp46_oracle(), F, cfg);
    VerifyReport v = verify_jiggle(r, cov, hyp46_oracle(), F, 2);
    bool pass = v.failed == 0 && v.schedule_ok && r.total_sup <= 2 * cfg.eps0;
    ok = ok && pass;
    os << "; 6-D Hyp46 (" << cov.children.size() << " children, " << cov.n_colors << " colors): " << v.passed << "/"
       << v.probes << " probes, sup " << r.total_sup;
  }
  return {ok, str(os)};
}

Outcome c10() {
  Predicate hminus = [](const Vec& p) { return p(0) * p(1) - p(2) * p(2) < 0; };
  Vec seed(3);
  seed << 1, -1, 0;
  AmplenessConfig cfg;
  cfg.seed = 10;
  Loop loop = loop_with_average(hminus, seed, Vec::Zero(3), 64, cfg);
  double err = loop.mean().norm();
  int outside = 0;
  for (const Vec& p : loop.samples)
    if (!hminus(p)) ++outside;
  std::ostringstream os;
  os << loop.samples.size() << " samples, mean error " << err << ", " << outside << " outside";
  return {err <= 1e-6 && outside == 0 && !loop.samples.empty(), str(os)};
}

}  // namespace

int main() {
  criterion(1, "signature", 1.0, c1);
  criterion(2, "gl witnesses", 1.0, c2);
  criterion(3, "exact-forms case table", 60.0, c3);
  criterion(4, "step-2 reduction", 30.0, c4);
  criterion(5, "contact / even contact", 30.0, c5);
  criterion(6, "functions emptiness", 60.0, c6);
  criterion(7, "hyperbolic trichotomy", 60.0, c7);
  criterion(8, "template at desk scale", 300.0, c8);
  criterion(9, "jiggling", 300.0, c9);
  criterion(10, "loop primitive", 1.0, c10);
  std::printf("%d of 10 criteria failed\n", g_failed);
  return g_failed ? 1 : 0;
}
