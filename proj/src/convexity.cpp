#include "amplex/convexity.hpp"

#include "amplex/kernels.hpp"
#include "amplex/lp.hpp"
#include "amplex/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace amplex {

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::TriviallyAmpleFull: return "TriviallyAmpleFull";
    case VerdictKind::TriviallyAmpleEmpty: return "TriviallyAmpleEmpty";
    case VerdictKind::AmpleWitnessed: return "AmpleWitnessed";
    case VerdictKind::NonAmpleWitnessed: return "NonAmpleWitnessed";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

bool is_ample(VerdictKind k) {
  return k == VerdictKind::TriviallyAmpleFull || k == VerdictKind::TriviallyAmpleEmpty || k == VerdictKind::AmpleWitnessed;
}

bool is_conclusive(VerdictKind k) { return k != VerdictKind::Inconclusive; }

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
      x = parent_[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[static_cast<std::size_t>(b)] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

std::vector<int> normalize_labels(UnionFind& uf, std::size_t n) {
  std::vector<int> labels(n);
  std::map<int, int> remap;
  for (std::size_t i = 0; i < n; ++i) {
    int r = uf.find(static_cast<int>(i));
    auto it = remap.find(r);
    if (it == remap.end()) it = remap.emplace(r, static_cast<int>(remap.size())).first;
    labels[i] = it->second;
  }
  return labels;
}

struct Edge {
  double dist;
  int i;
  int j;
  bool operator<(const Edge& o) const {
    if (dist != o.dist) return dist < o.dist;
    if (i != o.i) return i < o.i;
    return j < o.j;
  }
};

// Candidate parameters on [0,1] where a univariate function may vanish:
// refined sign changes and local minima of |f| on a grid.
std::vector<double> zero_candidates(const std::function<double(double)>& f, int grid) {
  std::vector<double> ts(static_cast<std::size_t>(grid + 1)), vs(static_cast<std::size_t>(grid + 1));
  for (int k = 0; k <= grid; ++k) {
    ts[static_cast<std::size_t>(k)] = static_cast<double>(k) / grid;
    vs[static_cast<std::size_t>(k)] = f(ts[static_cast<std::size_t>(k)]);
  }
  std::vector<double> out;
  for (int k = 0; k <= grid; ++k) {
    auto K = static_cast<std::size_t>(k);
    if (vs[K] == 0.0) out.push_back(ts[K]);
    if (k < grid && ((vs[K] < 0.0 && vs[K + 1] > 0.0) || (vs[K] > 0.0 && vs[K + 1] < 0.0))) {
      double lo = ts[K], hi = ts[K + 1], flo = vs[K];
      for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      out.push_back(0.5 * (lo + hi));
    }
    // touching zeros, including those in the end cells
    bool left = k == 0 || std::abs(vs[K]) <= std::abs(vs[K - 1]);
    bool right = k == grid || std::abs(vs[K]) <= std::abs(vs[K + 1]);
    if (left && right) {
      double lo = ts[k > 0 ? K - 1 : K], hi = ts[k < grid ? K + 1 : K];
      for (int it = 0; it < 80; ++it) {
        double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        if (std::abs(f(m1)) <= std::abs(f(m2))) hi = m2;
        else lo = m1;
      }
      out.push_back(0.5 * (lo + hi));
    }
  }
  return out;
}

// Polynomial through equispaced samples, evaluated by Lagrange form.
struct FittedPoly {
  std::vector<double> nodes;
  std::vector<double> values;
  double operator()(double t) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      double w = values[k];
      for (std::size_t j = 0; j < nodes.size(); ++j)
        if (j != k) w *= (t - nodes[j]) / (nodes[k] - nodes[j]);
      acc += w;
    }
    return acc;
  }
};

// Roots in [0,1] of the fitted polynomial when it is linear or quadratic,
// plus the vertex so touching zeros are seen.
std::vector<double> low_degree_zeros(const FittedPoly& fp, double scale) {
  std::vector<double> out;
  auto keep = [&](double t) {
    if (t >= -1e-12 && t <= 1.0 + 1e-12) out.push_back(std::clamp(t, 0.0, 1.0));
  };
  double c0 = fp.values[0], c1 = 0.0, c2 = 0.0;
  if (fp.values.size() == 2) {
    c1 = fp.values[1] - fp.values[0];
  } else {
    const double f0 = fp.values[0], fh = fp.values[1], f1 = fp.values[2];
    c1 = -3.0 * f0 + 4.0 * fh - f1;
    c2 = 2.0 * f0 - 4.0 * fh + 2.0 * f1;
  }
  if (c0 == 0.0) keep(0.0);
  if (std::abs(c2) <= 1e-14 * scale) {
    if (c1 != 0.0) keep(-c0 / c1);
    return out;
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc >= 0.0) {
    const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
    if (q != 0.0) {
      keep(q / c2);
      keep(c0 / q);
    }
  }
  keep(-c1 / (2.0 * c2));
  return out;
}

}  // namespace

bool segment_hits_locus(const PolynomialLocus& locus, const Vec& a, const Vec& b) {
  if (locus.polys.empty()) return false;
  const Vec dir = b - a;
  auto at = [&](double t) -> Vec { return a + t * dir; };
  const int deg = std::max(1, locus.degree);

  // scale of each polynomial along the segment
  std::vector<double> scale(locus.polys.size(), 0.0);
  std::vector<FittedPoly> fits(locus.polys.size());
  for (std::size_t j = 0; j < locus.polys.size(); ++j) {
    FittedPoly& fp = fits[j];
    for (int k = 0; k <= deg; ++k) {
      double t = static_cast<double>(k) / deg;
      fp.nodes.push_back(t);
      fp.values.push_back(locus.polys[j](at(t)));
      scale[j] = std::max(scale[j], std::abs(fp.values.back()));
    }
  }
  // Drive candidates from the polynomial with the largest scale.
  std::size_t lead = 0;
  for (std::size_t j = 1; j < scale.size(); ++j)
    if (scale[j] > scale[lead]) lead = j;
  if (scale[lead] == 0.0) {
    // all vanish at the nodes: check the midpoint before concluding
    for (const auto& p : locus.polys)
      if (p(at(0.5)) != 0.0) return false;
    return true;
  }
  const ScalarFn& g = locus.polys[lead];
  double probe_t = 0.5 / deg;
  double fit_err = std::abs(fits[lead](probe_t) - g(at(probe_t)));
  std::vector<double> cands;
  if (fit_err <= 1e-7 * scale[lead] && deg <= 2) {
    cands = low_degree_zeros(fits[lead], scale[lead]);
  } else if (fit_err <= 1e-7 * scale[lead]) {
    cands = zero_candidates([&](double t) { return fits[lead](t); }, 64);
  } else {
    cands = zero_candidates([&](double t) { return g(at(t)); }, 256);
  }
  for (double t : cands) {
    Vec x = at(t);
    bool all = true;
    for (std::size_t j = 0; j < locus.polys.size() && all; ++j) {
      double s = std::max({scale[j], std::abs(locus.polys[j](a)), std::abs(locus.polys[j](b))});
      if (j == lead) s = std::max(s, scale[lead]);
      double v = std::abs(locus.polys[j](x));
      all = v <= 1e-8 * s;
    }
    if (all) return true;
  }
  return false;
}

bool segment_clear(const SampledSet& set, const Vec& a, const Vec& b, int checks) {
  for (int k = 1; k <= checks; ++k) {
    double t = static_cast<double>(k) / (checks + 1);
    if (!set.member(a + t * (b - a))) return false;
  }
  for (const auto& locus : set.loci)
    if (segment_hits_locus(locus, a, b)) return false;
  return true;
}

int SampleCloud::components() const {
  int mx = -1;
  for (int l : labels) mx = std::max(mx, l);
  return mx + 1;
}

SampleCloud connected_components(const std::vector<Vec>& points, double epsilon) {
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  SampleCloud cloud;
  cloud.points = points;
  cloud.epsilon = epsilon;
  if (points.empty()) return cloud;
  cloud.dim = static_cast<int>(points.front().size());
  UnionFind uf(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if ((points[i] - points[j]).norm() < epsilon) uf.unite(static_cast<int>(i), static_cast<int>(j));
  cloud.labels = normalize_labels(uf, points.size());
  return cloud;
}

double HullCertificate::replay_error() const {
  if (points.empty()) return std::numeric_limits<double>::infinity();
  Vec acc = Vec::Zero(target.size());
  for (std::size_t i = 0; i < points.size(); ++i) acc += weights[i] * points[i];
  return (acc - target).norm();
}

std::optional<HullCertificate> hull_contains(const std::vector<Vec>& points, const Vec& target) {
  if (points.empty()) throw Error("hull of an empty point set");
  auto w = lp::hull_weights(points, target);
  if (!w) return std::nullopt;
  HullCertificate cert;
  cert.target = target;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double wi = (*w)(static_cast<Eigen::Index>(i));
    if (wi > 0.0) {
      cert.points.push_back(points[i]);
      cert.weights.push_back(wi);
    }
  }
  return cert;
}

int AmplenessConfig::resolved_samples(int dim) const {
  if (n_samples > 0) return n_samples;
  return 3 * std::max(48, 24 * dim);
}

namespace {

// Components of member points: visibility edges over nearest neighbours
// first, then capped attempts between the remaining components.
std::vector<int> member_components(const SampledSet& set, const std::vector<Vec>& pts, const AmplenessConfig& cfg) {
  const std::size_t n = pts.size();
  UnionFind uf(n);
  if (n <= 1) return normalize_labels(uf, n);
  const std::size_t K = std::min<std::size_t>(n - 1, static_cast<std::size_t>(2 * set.dim + 8));

  Mat D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double d = (pts[i] - pts[j]).norm();
      D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
      D(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
    }

  std::vector<Edge> edges;
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<long>(K + 1), order.end(), [&](int a, int b) {
      double da = D(static_cast<Eigen::Index>(i), a), db = D(static_cast<Eigen::Index>(i), b);
      return da != db ? da < db : a < b;
    });
    for (std::size_t k = 0; k <= K; ++k) {
      int j = order[k];
      if (static_cast<std::size_t>(j) == i) continue;
      double d = D(static_cast<Eigen::Index>(i), j);
      if (!(d < cfg.epsilon)) continue;
      int a = std::min<int>(static_cast<int>(i), j), b = std::max<int>(static_cast<int>(i), j);
      edges.push_back({d, a, b});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) { return x.i == y.i && x.j == y.j; }),
              edges.end());
  for (const auto& e : edges) {
    if (uf.find(e.i) == uf.find(e.j)) continue;
    if (segment_clear(set, pts[static_cast<std::size_t>(e.i)], pts[static_cast<std::size_t>(e.j)], cfg.segment_checks))
      uf.unite(e.i, e.j);
  }

  // remaining components: try the nearest cross pairs, capped per pair
  auto labels = normalize_labels(uf, n);
  int ncomp = *std::max_element(labels.begin(), labels.end()) + 1;
  if (ncomp > 1) {
    std::vector<Edge> cross;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (labels[i] == labels[j]) continue;
        double d = D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        if (d < cfg.epsilon) cross.push_back({d, static_cast<int>(i), static_cast<int>(j)});
      }
    std::sort(cross.begin(), cross.end());
    std::map<std::pair<int, int>, int> attempts;
    for (const auto& e : cross) {
      int ra = uf.find(e.i), rb = uf.find(e.j);
      if (ra == rb) continue;
      auto key = std::make_pair(std::min(ra, rb), std::max(ra, rb));
      int& count = attempts[key];
      if (count >= cfg.max_cross_attempts) continue;
      ++count;
      if (segment_clear(set, pts[static_cast<std::size_t>(e.i)], pts[static_cast<std::size_t>(e.j)], cfg.segment_checks))
        uf.unite(e.i, e.j);
    }
    labels = normalize_labels(uf, n);
  }
  return labels;
}

std::vector<Vec> draw_samples(int dim, const Vec& base, const AmplenessConfig& cfg, int total) {
  std::vector<Vec> pts;
  pts.reserve(static_cast<std::size_t>(total));
  pts.push_back(base);
  const int rest = total - 1;
  const int nr = static_cast<int>(cfg.radii.size());
  CounterRng root = make_rng(cfg.seed, Stream::Samples);
  int idx = 0;
  for (int r = 0; r < nr; ++r) {
    int count = rest / nr + (r < rest % nr ? 1 : 0);
    for (int k = 0; k < count; ++k, ++idx) {
      CounterRng rng = root.split(static_cast<std::uint64_t>(idx));
      pts.push_back(base + rng.normal_vec(dim, cfg.radii[static_cast<std::size_t>(r)] * cfg.scale));
    }
  }
  return pts;
}

// Try to enlarge the base component with members near the targets that
// are visibly connected to it. Returns the number of points added.
int refine_component(const SampledSet& set, std::vector<Vec>& comp, const std::vector<Vec>& targets, const Vec& base,
                     const AmplenessConfig& cfg, int round) {
  CounterRng root = make_rng(cfg.seed, Stream::Refine).split(static_cast<std::uint64_t>(round));
  const double R = cfg.target_fraction * cfg.radii.back() * cfg.scale;
  std::vector<Vec> cands;
  std::uint64_t idx = 0;
  for (const auto& t : targets) {
    for (int k = 0; k < set.dim + 4; ++k) {
      CounterRng rng = root.split(idx++);
      cands.push_back(t + rng.normal_vec(set.dim, R / 4.0));
    }
    for (double f : {0.25, 0.5, 0.75, 1.25, 1.5}) cands.push_back(base + f * (t - base));
  }
  auto flags = kernels::evaluate_members(set.member, cands, kernels::mode_of(cfg.parallel));
  int added = 0;
  for (std::size_t c = 0; c < cands.size(); ++c) {
    if (!flags[c]) continue;
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t i = 0; i < comp.size(); ++i) near.emplace_back((comp[i] - cands[c]).norm(), i);
    std::size_t K = std::min<std::size_t>(near.size(), 8);
    std::partial_sort(near.begin(), near.begin() + static_cast<long>(K), near.end());
    for (std::size_t k = 0; k < K; ++k) {
      if (segment_clear(set, comp[near[k].second], cands[c], cfg.segment_checks)) {
        comp.push_back(cands[c]);
        ++added;
        break;
      }
    }
  }
  return added;
}

}  // namespace

AmplenessVerdict ampleness_test(const SampledSet& set, const AmplenessConfig& cfg) {
  const int dim = set.dim;
  if (dim < 1) throw DimensionError("ampleness test needs a positive dimension");
  const int total = cfg.resolved_samples(dim);
  if (total < dim + 1) throw Error("ampleness test needs at least dim+1 samples");
  if (cfg.radii.empty()) throw Error("radius schedule is empty");
  const Vec base = cfg.center ? *cfg.center : Vec::Zero(dim);
  if (base.size() != dim) throw DimensionError("ampleness center has wrong size");

  AmplenessVerdict v;
  std::vector<Vec> pts = draw_samples(dim, base, cfg, total);
  auto flags = kernels::evaluate_members(set.member, pts, kernels::mode_of(cfg.parallel));
  v.n_samples = total;
  std::vector<Vec> members;
  std::vector<std::size_t> member_idx;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (flags[i]) {
      members.push_back(pts[i]);
      member_idx.push_back(i);
    }
  v.n_members = static_cast<int>(members.size());
  if (members.empty()) {
    v.kind = VerdictKind::TriviallyAmpleEmpty;
    return v;
  }

  auto labels = member_components(set, members, cfg);
  v.n_components = *std::max_element(labels.begin(), labels.end()) + 1;
  if (v.n_members == total && v.n_components == 1) {
    v.kind = VerdictKind::TriviallyAmpleFull;
    return v;
  }

  // base component: the base itself, or the member nearest to it
  std::size_t anchor = 0;
  {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < members.size(); ++i) {
      double d = (members[i] - base).norm();
      if (d < best) {
        best = d;
        anchor = i;
      }
    }
  }
  std::vector<Vec> comp;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (labels[i] == labels[anchor]) comp.push_back(members[i]);

  const double R = cfg.target_fraction * cfg.radii.back() * cfg.scale;
  std::vector<Vec> targets;
  for (int i = 0; i < dim; ++i) {
    targets.push_back(base + R * Vec::Unit(dim, i));
    targets.push_back(base - R * Vec::Unit(dim, i));
  }

  for (int round = 0; round <= cfg.refine_rounds; ++round) {
    std::vector<HullCertificate> certs;
    std::vector<Vec> missing;
    for (const auto& t : targets) {
      auto c = hull_contains(comp, t);
      if (c) certs.push_back(std::move(*c));
      else missing.push_back(t);
    }
    if (missing.empty()) {
      v.kind = VerdictKind::AmpleWitnessed;
      v.certificates = std::move(certs);
      v.component_points = comp;
      return v;
    }
    // refinement exhausted, or nothing connects beyond the current hull
    bool last = round == cfg.refine_rounds || refine_component(set, comp, missing, base, cfg, round) == 0;
    if (last) {
      std::optional<SeparatingFunctional> best;
      for (const auto& t : missing) {
        lp::Separation s = lp::separate(comp, t);
        if (!best || s.margin > best->margin) best = SeparatingFunctional{s.gradient, s.offset, s.margin, t};
      }
      if (best && best->margin > 1e-6) {
        v.kind = VerdictKind::NonAmpleWitnessed;
        v.separation = best;
        v.component_points = comp;
        return v;
      }
      break;
    }
  }
  v.kind = VerdictKind::Inconclusive;
  v.component_points = comp;
  return v;
}

AmplenessVerdict ampleness_test(const Predicate& member, int dim, const AmplenessConfig& cfg) {
  return ampleness_test(SampledSet{dim, member, {}}, cfg);
}

int line_crossing_probe(const Complement& complement, const CrossingConfig& cfg) {
  if (cfg.trials < 100) throw Error("line crossing probe needs at least 100 trials");
  if (complement.dim < 1) throw DimensionError("probe dimension must be positive");
  auto outcomes = kernels::crossing_trials(complement, cfg, kernels::mode_of(cfg.parallel));
  long long rejections = 0;
  bool hit = false;
  for (const auto& o : outcomes) {
    rejections += o.rejections;
    hit = hit || o.hit;
  }
  if (rejections >= 10LL * cfg.trials) throw Error("complement appears full: no points outside it were found");
  return hit ? 1 : 2;
}

std::vector<std::pair<double, Mat>> gl_ample_witness(const Mat& M, int target_sign) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw DimensionError("matrix must be square");
  if (n < 2) throw UnsupportedError("GL(1) is not ample: no witness exists for n = 1");
  const double det = M.determinant();
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const bool singular = std::abs(det) <= 1e-12 * std::pow(scale, static_cast<double>(n));
  std::vector<std::pair<double, Mat>> out;
  if (singular) {
    Eigen::EigenSolver<Mat> es(M, false);
    auto ev = es.eigenvalues();
    double lambda = 1.0;
    for (;; lambda += 1.0) {
      bool clash = false;
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev(i) - std::complex<double>(lambda, 0.0)) < 1e-3) clash = true;
      if (!clash) break;
    }
    Mat I = Mat::Identity(n, n);
    out.emplace_back(0.5, Mat(2.0 * M - 2.0 * lambda * I));
    out.emplace_back(0.5, Mat(2.0 * lambda * I));
    return out;
  }
  const int sign = det > 0 ? 1 : -1;
  if ((target_sign < 0 ? -1 : 1) == sign) {
    out.emplace_back(1.0, M);
    return out;
  }
  Mat M1 = M, M2 = M;
  M1.col(0) = -M.col(0);
  M1.col(1) = 3.0 * M.col(1);
  M2.col(0) = 3.0 * M.col(0);
  M2.col(1) = -M.col(1);
  out.emplace_back(0.5, M1);
  out.emplace_back(0.5, M2);
  return out;
}

namespace {

struct SubSlice {
  SampledSet set;
  Mat Q;
  Vec origin;
};

SubSlice restrict_to_span(const SampledSet& set, const Vec& origin, const std::vector<Vec>& directions) {
  Mat cols(origin.size(), static_cast<Eigen::Index>(directions.size()));
  for (std::size_t i = 0; i < directions.size(); ++i) {
    if (directions[i].size() != origin.size()) throw DimensionError("direction has wrong size");
    cols.col(static_cast<Eigen::Index>(i)) = directions[i];
  }
  SubSlice s;
  s.Q = orthonormal_span(cols);
  s.origin = origin;
  const Mat Q = s.Q;
  const Vec o = origin;
  const Predicate member = set.member;
  s.set.dim = static_cast<int>(Q.cols());
  s.set.member = [member, Q, o](const Vec& x) { return member(o + Q * x); };
  for (const auto& locus : set.loci) {
    PolynomialLocus l;
    l.degree = locus.degree;
    l.label = locus.label;
    for (const auto& p : locus.polys) l.polys.push_back([p, Q, o](const Vec& x) { return p(o + Q * x); });
    s.set.loci.push_back(std::move(l));
  }
  return s;
}

}  // namespace

ChextResult chext_member(const SampledSet& set, const Vec& F_point, const std::vector<Vec>& directions, const Vec& z,
                         const AmplenessConfig& cfg) {
  if (F_point.size() != set.dim || z.size() != set.dim) throw DimensionError("point has wrong size");
  if (!set.member(F_point)) throw Error("base point does not satisfy the predicate");
  SubSlice sub = restrict_to_span(set, F_point, directions);
  Vec dz = z - F_point;
  Vec coords = sub.Q.transpose() * dz;
  if ((sub.Q * coords - dz).norm() > 1e-9 * std::max(1.0, dz.norm())) throw Error("target is not on the slice");

  ChextResult res;
  if (dz.norm() == 0.0) {
    res.inside = true;
    res.certificate = HullCertificate{z, {z}, {1.0}};
    return res;
  }
  if (sub.set.dim == 0) return res;

  AmplenessConfig c = cfg;
  c.center = Vec::Zero(sub.set.dim);
  const int total = c.resolved_samples(sub.set.dim);
  std::vector<Vec> pts = draw_samples(sub.set.dim, *c.center, c, total);
  auto flags = kernels::evaluate_members(sub.set.member, pts, kernels::mode_of(c.parallel));
  std::vector<Vec> members;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (flags[i]) members.push_back(pts[i]);
  auto labels = member_components(sub.set, members, c);
  std::vector<Vec> comp;
  for (std::size_t i = 0; i < members.size(); ++i)
    if (labels[i] == labels[0]) comp.push_back(members[i]);

  for (int round = 0; round <= c.refine_rounds; ++round) {
    auto cert = hull_contains(comp, coords);
    if (cert) {
      HullCertificate out;
      out.target = z;
      for (std::size_t i = 0; i < cert->points.size(); ++i) {
        out.points.push_back(F_point + sub.Q * cert->points[i]);
        out.weights.push_back(cert->weights[i]);
      }
      res.inside = true;
      res.certificate = std::move(out);
      return res;
    }
    if (round == c.refine_rounds) break;
    if (refine_component(sub.set, comp, {coords}, *c.center, c, round) == 0) break;
  }
  return res;
}

ChextResult chext_member(const Predicate& member, const Vec& F_point, const std::vector<Vec>& directions, const Vec& z,
                         const AmplenessConfig& cfg) {
  return chext_member(SampledSet{static_cast<int>(F_point.size()), member, {}}, F_point, directions, z, cfg);
}

Vec Loop::mean() const {
  if (samples.empty()) return Vec();
  Vec acc = Vec::Zero(samples.front().size());
  for (const auto& s : samples) acc += s;
  return acc / static_cast<double>(samples.size());
}

Loop loop_with_average(const SampledSet& set, const Vec& component_seed, const Vec& target, int steps,
                       const AmplenessConfig& cfg) {
  if (steps < 1) throw Error("loop needs at least one step");
  Loop loop;
  if (set.member(target) && (target == component_seed || segment_clear(set, component_seed, target, cfg.segment_checks))) {
    loop.samples.assign(static_cast<std::size_t>(steps), target);
    return loop;
  }
  std::vector<Vec> full;
  for (int i = 0; i < set.dim; ++i) full.push_back(Vec::Unit(set.dim, i));
  ChextResult ch = chext_member(set, component_seed, full, target, cfg);
  if (!ch.inside) throw Error("target has no hull certificate from the seed's component");
  const auto& cert = *ch.certificate;

  // counts proportional to the weights, largest remainder rounding
  const std::size_t k = cert.points.size();
  std::vector<int> counts(k);
  std::vector<std::pair<double, std::size_t>> rem;
  int used = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double exact = cert.weights[i] * steps;
    counts[i] = static_cast<int>(std::floor(exact));
    used += counts[i];
    rem.emplace_back(-(exact - counts[i]), i);
  }
  std::sort(rem.begin(), rem.end());
  for (std::size_t r = 0; used < steps; ++r, ++used) ++counts[rem[r % k].second];

  // interleave so consecutive samples cycle through the certificate points
  std::vector<int> left = counts;
  while (static_cast<int>(loop.samples.size()) < steps)
    for (std::size_t i = 0; i < k; ++i)
      if (left[i] > 0) {
        loop.samples.push_back(cert.points[i]);
        --left[i];
      }

  // rounding moved the mean; shift samples back while staying inside
  Vec err = target - loop.mean();
  if (err.norm() > 0.0) {
    std::vector<Vec> shifted = loop.samples;
    bool ok = true;
    for (auto& s : shifted) {
      s += err;
      if (!set.member(s)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      loop.samples = std::move(shifted);
    } else {
      // concentrate the correction on the block that tolerates it
      bool fixed = false;
      for (std::size_t i = 0; i < k && !fixed; ++i) {
        if (counts[i] == 0) continue;
        Vec moved = cert.points[i] + err * (static_cast<double>(steps) / counts[i]);
        if (!set.member(moved)) continue;
        for (auto& s : loop.samples)
          if (s == cert.points[i]) s = moved;
        fixed = true;
      }
      if (!fixed) throw Error("could not correct the loop mean inside the component");
    }
  }
  return loop;
}

Loop loop_with_average(const Predicate& member, const Vec& component_seed, const Vec& target, int steps,
                       const AmplenessConfig& cfg) {
  return loop_with_average(SampledSet{static_cast<int>(component_seed.size()), member, {}}, component_seed, target,
                           steps, cfg);
}

}  // namespace amplex
