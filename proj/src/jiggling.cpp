#include "amplex/jiggling.hpp"

#include "amplex/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

namespace amplex {

bool is_principal_frame(const Chart& chart) {
  if (chart.frame.empty()) return false;
  return numerical_rank(rows_of(chart.frame.covectors())).rank == chart.box.dim();
}

std::vector<int> CubicalCover::closed_neighborhood(int child) const {
  std::vector<int> out = neighbors.at(static_cast<std::size_t>(child));
  out.insert(std::lower_bound(out.begin(), out.end(), child), child);
  return out;
}

namespace {

void check_parents(const std::vector<Chart>& parents) {
  if (parents.empty()) throw Error("cover needs at least one parent chart");
  const int n = parents.front().box.dim();
  if (n < 1) throw DimensionError("chart dimension must be positive");
  for (const auto& p : parents) {
    if (p.box.dim() != n || p.box.hi.size() != n) throw DimensionError("parent charts differ in dimension");
    for (int i = 0; i < n; ++i)
      if (!(p.box.hi(i) > p.box.lo(i))) throw Error("parent box must have positive extent");
    if (!p.frame.empty() && p.frame.dim() != n) throw DimensionError("frame dimension differs from chart");
  }
}

class Bits {
 public:
  bool test(int i) const {
    auto w = static_cast<std::size_t>(i) / 64;
    return w < words_.size() && ((words_[w] >> (i % 64)) & 1ULL);
  }
  void set(int i) {
    auto w = static_cast<std::size_t>(i) / 64;
    if (w >= words_.size()) words_.resize(w + 1, 0);
    words_[w] |= 1ULL << (i % 64);
  }
  void merge(const Bits& o) {
    if (o.words_.size() > words_.size()) words_.resize(o.words_.size(), 0);
    for (std::size_t i = 0; i < o.words_.size(); ++i) words_[i] |= o.words_[i];
  }

 private:
  std::vector<std::uint64_t> words_;
};

}  // namespace

CubicalCover subdivide_cover(const std::vector<Chart>& parents, int c, double C) {
  check_parents(parents);
  if (c < 1) throw Error("subdivision count must be at least 1");
  if (!(C > 1.0)) throw Error("dilation factor must exceed 1");
  if (C >= 2.0) throw Error("dilation factor must be below 2");
  const int n = parents.front().box.dim();
  const long long per_axis = 2LL * c;
  long long count = 1;
  for (int i = 0; i < n; ++i) {
    count *= per_axis;
    if (count > 2'000'000) throw Error("subdivision too fine");
  }

  CubicalCover cover;
  cover.parents = parents;
  cover.c = c;
  cover.C = C;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    const Box& pb = parents[p].box;
    Vec side = (pb.hi - pb.lo) / static_cast<double>(per_axis);
    std::vector<long long> idx(static_cast<std::size_t>(n), 0);
    for (long long k = 0; k < count; ++k) {
      long long rest = k;
      for (int i = 0; i < n; ++i) {
        idx[static_cast<std::size_t>(i)] = rest % per_axis;
        rest /= per_axis;
      }
      Vec center(n);
      for (int i = 0; i < n; ++i) center(i) = pb.lo(i) + side(i) * (static_cast<double>(idx[static_cast<std::size_t>(i)]) + 0.5);
      Chart ch;
      ch.box.lo = center - 0.5 * C * side;
      ch.box.hi = center + 0.5 * C * side;
      ch.marked = center;
      ch.frame = parents[p].frame;
      cover.children.push_back(std::move(ch));
      cover.parent_of.push_back(static_cast<int>(p));
    }
  }

  const std::size_t N = cover.children.size();
  cover.neighbors.assign(N, {});
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a + 1; b < N; ++b)
      if (cover.children[a].box.intersects(cover.children[b].box)) {
        cover.neighbors[a].push_back(static_cast<int>(b));
        cover.neighbors[b].push_back(static_cast<int>(a));
      }
  for (auto& l : cover.neighbors) std::sort(l.begin(), l.end());

  // distance-2 greedy coloring; used[w] holds the colors inside N[w]
  cover.colors.assign(N, -1);
  std::vector<Bits> used(N);
  int offset = 0;
  for (std::size_t p = 0; p < parents.size(); ++p) {
    int top = offset - 1;
    for (std::size_t u = 0; u < N; ++u) {
      if (cover.parent_of[u] != static_cast<int>(p)) continue;
      Bits forbidden = used[u];
      for (int w : cover.neighbors[u]) forbidden.merge(used[static_cast<std::size_t>(w)]);
      int color = offset;
      while (forbidden.test(color)) ++color;
      cover.colors[u] = color;
      top = std::max(top, color);
      used[u].set(color);
      for (int w : cover.neighbors[u]) used[static_cast<std::size_t>(w)].set(color);
    }
    offset = top + 1;
  }
  cover.n_colors = offset;
  return cover;
}

NeighborReport neighbor_sets(const CubicalCover& cover, int d1) {
  NeighborReport r;
  r.lists = cover.neighbors;
  if (d1 <= 0) {
    long long b = 1;
    for (int i = 0; i < cover.dim(); ++i) b *= 3;
    d1 = static_cast<int>(b - 1);
  }
  r.bound = d1;
  for (const auto& l : r.lists) r.max_degree = std::max(r.max_degree, static_cast<int>(l.size()));
  r.within_bound = r.max_degree <= r.bound;
  return r;
}

bool coloring_sound(const CubicalCover& cover) {
  for (std::size_t w = 0; w < cover.children.size(); ++w) {
    std::vector<int> cols;
    for (int v : cover.closed_neighborhood(static_cast<int>(w))) cols.push_back(cover.colors[static_cast<std::size_t>(v)]);
    std::sort(cols.begin(), cols.end());
    if (std::adjacent_find(cols.begin(), cols.end()) != cols.end()) return false;
  }
  return true;
}

// ------------------------------------------------------------- schedule

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double log_tail(const std::vector<double>& log_eps, std::size_t i) {
  double t = -std::numeric_limits<double>::infinity();
  for (std::size_t j = i + 1; j < log_eps.size(); ++j) t = log_add(t, log_eps[j]);
  return t;
}

}  // namespace

double EpsSchedule::eps(std::size_t i) const { return std::exp(log_eps.at(i)); }

double EpsSchedule::margin(std::size_t i) const {
  double t = log_tail(log_eps, i);
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  return std::exp(std::log(A) + t);
}

double EpsSchedule::total() const {
  double t = -std::numeric_limits<double>::infinity();
  for (double l : log_eps) t = log_add(t, l);
  return std::exp(t);
}

EpsSchedule make_schedule(double eps0, double A, int n_colors) {
  if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw Error("epsilon0 must be positive");
  if (!(A > 0.0) || !std::isfinite(A)) throw Error("A must be positive");
  if (n_colors < 0) throw Error("color count must be non-negative");
  EpsSchedule s;
  s.A = A;
  const double lq = std::log(2.0 * A + 2.0);
  for (int i = 0; i < n_colors; ++i) s.log_eps.push_back(std::log(eps0) - i * lq);
  return s;
}

bool schedule_ok(const std::vector<double>& log_eps, double A) {
  if (!(A > 0.0)) return false;
  double tail = -std::numeric_limits<double>::infinity();
  const double l2a = std::log(2.0 * A);
  for (std::size_t k = log_eps.size(); k-- > 0;) {
    if (std::isnan(log_eps[k])) return false;
    if (tail != -std::numeric_limits<double>::infinity() && !(log_eps[k] > l2a + tail)) return false;
    tail = log_add(tail, log_eps[k]);
  }
  return true;
}

bool schedule_ok_linear(const std::vector<double>& eps, double A) {
  std::vector<double> l;
  for (double e : eps) {
    if (!(e > 0.0)) return false;
    l.push_back(std::log(e));
  }
  return schedule_ok(l, A);
}

// --------------------------------------------------------------- oracles

Oracle constant_oracle(bool value) {
  Oracle o;
  o.name = value ? "constant-true" : "constant-false";
  o.prepare = [value](const JetForms&) {
    PreparedOracle p;
    p.full = [value](const HyperplaneConfig&, const Vec&) { return value; };
    p.embed = [](const Covector& c) { return Vec(c); };
    p.unary = [value](const Vec&, const Vec&) { return value; };
    p.pair = [value](const Vec&, const Vec&, const Vec&) { return value; };
    p.point_independent = true;
    return p;
  };
  return o;
}

namespace {

double line_angle_gap(const Covector& c, double theta) {
  double a = std::atan2(c(1), c(0)) - theta;
  a = std::fmod(a, std::numbers::pi);
  if (a < 0) a += std::numbers::pi;
  return std::min(a, std::numbers::pi - a);
}

}  // namespace

Oracle angle_oracle(double delta, double theta0, double kappa) {
  Oracle o;
  std::ostringstream name;
  name << "angle(delta=" << delta << ")";
  o.name = name.str();
  o.prepare = [delta, theta0, kappa](const JetForms&) {
    auto theta = [theta0, kappa](const Vec& p) { return theta0 + kappa * (p(0) + p(1)); };
    PreparedOracle p;
    p.embed = [](const Covector& c) { return Vec(c); };
    p.unary = [delta, theta](const Vec& c, const Vec& x) { return line_angle_gap(c, theta(x)) > delta; };
    p.pair = [](const Vec&, const Vec&, const Vec&) { return true; };
    p.clearance = [delta, theta](const Covector& c, const Vec& x) { return line_angle_gap(c, theta(x)) - delta; };
    p.full = [delta, theta](const HyperplaneConfig& cfg, const Vec& x) {
      for (const auto& c : cfg.covectors())
        if (!(line_angle_gap(c, theta(x)) > delta)) return false;
      return true;
    };
    p.point_independent = kappa == 0.0;
    return p;
  };
  return o;
}

Oracle hyp46_oracle() {
  Oracle o;
  o.name = "hyp46-template";
  o.prepare = [](const JetForms& F) {
    PreparedOracle p;
    p.point_independent = true;
    MemberResult m = F.n == 6 && F.m == 2 ? relation_member(RelationId::hyp46(), F) : MemberResult{};
    if (!m.member || m.boundary) {
      p.full = [](const HyperplaneConfig&, const Vec&) { return false; };
      p.embed = [](const Covector& c) { return Vec(c); };
      p.unary = [](const Vec&, const Vec&) { return false; };
      p.pair = [](const Vec&, const Vec&, const Vec&) { return false; };
      return p;
    }
    auto cj = std::make_shared<const CompiledJet>(F);
    p.full = [F](const HyperplaneConfig& cfg, const Vec&) { return template_A_member(F, cfg).member; };
    p.embed = [cj](const Covector& c) {
      Vec e(5);
      e << cj->restrict(c), c.norm();
      return e;
    };
    p.unary = [cj](const Vec& e, const Vec&) { return !cj->sigma1(e.head(4), e(4)); };
    p.pair = [cj](const Vec& a, const Vec& b, const Vec&) { return !cj->sigma2(a.head(4), a(4), b.head(4), b(4)); };
    return p;
  };
  return o;
}

JiggleError::JiggleError(int child, int color)
    : Error("jiggling found no admissible perturbation at child " + std::to_string(child) + " (color " +
            std::to_string(color) + "); the subdivision is probably too coarse"),
      child_(child),
      color_(color) {}

std::vector<Vec> probe_points(const Box& box, int per_axis) {
  if (per_axis < 1) throw Error("probe grid needs at least one point per axis");
  const int n = box.dim();
  long long count = 1;
  for (int i = 0; i < n; ++i) count *= per_axis;
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) {
    long long rest = k;
    Vec p(n);
    for (int i = 0; i < n; ++i) {
      int j = static_cast<int>(rest % per_axis);
      rest /= per_axis;
      p(i) = per_axis == 1 ? 0.5 * (box.lo(i) + box.hi(i))
                           : box.lo(i) + (box.hi(i) - box.lo(i)) * j / static_cast<double>(per_axis - 1);
    }
    out.push_back(std::move(p));
  }
  return out;
}

// --------------------------------------------------------------- engine

namespace {

double projective_distance(const Vec& a, const Vec& b) { return std::min((a - b).norm(), (a + b).norm()); }

Vec unit(const Vec& v) {
  Vec u = v / v.norm();
  return u;
}

Vec perturb_covector(const Vec& c, double radius, CounterRng& rng) {
  if (radius <= 0.0) return c;
  Vec d = rng.in_ball(c.size(), radius);
  d -= d.dot(c) * c;
  return unit(c + d);
}

class Engine {
 public:
  Engine(const CubicalCover& cover, PreparedOracle oracle, std::uint64_t seed, int margin_samples, int per_axis)
      : cover_(cover), o_(std::move(oracle)), seed_(seed), margin_samples_(margin_samples), per_axis_(per_axis) {
    const std::size_t N = cover.children.size();
    raw_.resize(N);
    emb_.resize(N);
    ver_.assign(N, 0);
    next_ver_.assign(N, 0);
    unary_memo_.resize(N);
    pair_memo_.resize(N);
    for (std::size_t f = 0; f < N; ++f) {
      for (const auto& c : cover.children[f].frame.covectors()) raw_[f].push_back(unit(c));
      reembed(static_cast<int>(f));
      pair_memo_[f].resize(cover.neighbors[f].size());
    }
  }

  const std::vector<Vec>& raw(int f) const { return raw_[static_cast<std::size_t>(f)]; }

  void set_frame(int f, std::vector<Vec> covs) {
    raw_[static_cast<std::size_t>(f)] = std::move(covs);
    ver_[static_cast<std::size_t>(f)] = ++next_ver_[static_cast<std::size_t>(f)];
    reembed(f);
  }

  void restore_frame(int f, std::vector<Vec> covs, unsigned version) {
    raw_[static_cast<std::size_t>(f)] = std::move(covs);
    ver_[static_cast<std::size_t>(f)] = version;
    reembed(f);
  }

  unsigned version(int f) const { return ver_[static_cast<std::size_t>(f)]; }

  std::vector<Vec> probes(int child) const { return probe_points(cover_.children[static_cast<std::size_t>(child)].box, per_axis_); }

  std::vector<int> charts_at(int child, const Vec& p) const {
    std::vector<int> s;
    for (int v : cover_.closed_neighborhood(child))
      if (cover_.children[static_cast<std::size_t>(v)].box.contains(p)) s.push_back(v);
    return s;
  }

  // Oracle at one probe of `child` with perturbation margin r.
  bool probe_ok(int child, int k, const Vec& p, double r) {
    std::vector<int> S = charts_at(child, p);
    if (!o_.decomposable()) return full_ok(child, k, S, p, r);
    const bool memo = o_.point_independent;
    for (int f : S)
      if (!(memo ? unary_memo_ok(f, p, r) : unary_ok(f, p, r, rng_for(f, 0, k)))) return false;
    for (std::size_t i = 0; i < S.size(); ++i)
      for (std::size_t j = i + 1; j < S.size(); ++j)
        if (!(memo ? pair_memo_ok(S[i], S[j], p, r) : pair_ok(S[i], S[j], p, r, rng_for(S[i], S[j], k)))) return false;
    return true;
  }

  bool child_ok(int child, double r) {
    auto ps = probes(child);
    for (std::size_t k = 0; k < ps.size(); ++k)
      if (!probe_ok(child, static_cast<int>(k), ps[k], r)) return false;
    return true;
  }

 private:
  struct UnaryEntry {
    unsigned v = std::numeric_limits<unsigned>::max();
    bool ok = false;
    double margin = -1.0;
  };
  struct PairEntry {
    unsigned vf = std::numeric_limits<unsigned>::max();
    unsigned vg = std::numeric_limits<unsigned>::max();
    bool ok = false;
    double margin = -1.0;
  };

  void reembed(int f) {
    auto& e = emb_[static_cast<std::size_t>(f)];
    e.clear();
    for (const auto& c : raw_[static_cast<std::size_t>(f)]) e.push_back(o_.embed(c));
  }

  CounterRng rng_for(int f, int g, int k) const {
    std::uint64_t key = CounterRng::mix(CounterRng::mix(static_cast<std::uint64_t>(f), ver_[static_cast<std::size_t>(f)]),
                                        CounterRng::mix(static_cast<std::uint64_t>(g), ver_[static_cast<std::size_t>(g)]));
    return make_rng(seed_, Stream::Margin).split(CounterRng::mix(key, static_cast<std::uint64_t>(k)));
  }

  bool covectors_ok(const std::vector<Vec>& ea, const std::vector<Vec>& eb, bool same, const Vec& p) const {
    if (same) {
      for (std::size_t i = 0; i < ea.size(); ++i) {
        if (!o_.unary(ea[i], p)) return false;
        for (std::size_t j = i + 1; j < ea.size(); ++j)
          if (!o_.pair(ea[i], ea[j], p)) return false;
      }
      return true;
    }
    for (const auto& a : ea)
      for (const auto& b : eb)
        if (!o_.pair(a, b, p)) return false;
    return true;
  }

  std::vector<Vec> embed_perturbed(const std::vector<Vec>& raw, double r, CounterRng& rng) const {
    std::vector<Vec> out;
    for (const auto& c : raw) out.push_back(o_.embed(perturb_covector(c, r, rng)));
    return out;
  }

  bool clearance_ok(int f, const Vec& p, double r) const {
    const double need = std::asin(std::min(r, 1.0));
    for (const auto& c : raw_[static_cast<std::size_t>(f)])
      if (!(o_.clearance(c, p) > need)) return false;
    return true;
  }

  bool unary_ok(int f, const Vec& p, double r, CounterRng rng) const {
    const auto& e = emb_[static_cast<std::size_t>(f)];
    if (!covectors_ok(e, e, true, p)) return false;
    if (r <= 0.0) return true;
    if (o_.clearance) return clearance_ok(f, p, r);
    for (int s = 0; s < margin_samples_; ++s) {
      auto pe = embed_perturbed(raw_[static_cast<std::size_t>(f)], r, rng);
      if (!covectors_ok(pe, pe, true, p)) return false;
    }
    return true;
  }

  bool pair_ok(int f, int g, const Vec& p, double r, CounterRng rng) const {
    if (!covectors_ok(emb_[static_cast<std::size_t>(f)], emb_[static_cast<std::size_t>(g)], false, p)) return false;
    if (r <= 0.0) return true;
    for (int s = 0; s < margin_samples_; ++s) {
      auto pf = embed_perturbed(raw_[static_cast<std::size_t>(f)], r, rng);
      auto pg = embed_perturbed(raw_[static_cast<std::size_t>(g)], r, rng);
      if (!covectors_ok(pf, pg, false, p)) return false;
    }
    return true;
  }

  bool unary_memo_ok(int f, const Vec& p, double r) {
    UnaryEntry& e = unary_memo_[static_cast<std::size_t>(f)];
    if (e.v == ver_[static_cast<std::size_t>(f)]) {
      if (!e.ok) return false;
      if (e.margin >= r) return true;
    }
    bool base = covectors_ok(emb_[static_cast<std::size_t>(f)], emb_[static_cast<std::size_t>(f)], true, p);
    e.v = ver_[static_cast<std::size_t>(f)];
    e.ok = base;
    e.margin = -1.0;
    if (!base) return false;
    if (unary_ok(f, p, r, rng_for(f, f, 0))) {
      e.margin = r;
      return true;
    }
    return false;
  }

  bool pair_memo_ok(int f, int g, const Vec& p, double r) {
    if (g < f) std::swap(f, g);
    const auto& nb = cover_.neighbors[static_cast<std::size_t>(f)];
    auto it = std::lower_bound(nb.begin(), nb.end(), g);
    if (it == nb.end() || *it != g) return pair_ok(f, g, p, r, rng_for(f, g, 0));
    PairEntry& e = pair_memo_[static_cast<std::size_t>(f)][static_cast<std::size_t>(it - nb.begin())];
    const unsigned vf = ver_[static_cast<std::size_t>(f)], vg = ver_[static_cast<std::size_t>(g)];
    if (e.vf == vf && e.vg == vg) {
      if (!e.ok) return false;
      if (e.margin >= r) return true;
    }
    bool base = covectors_ok(emb_[static_cast<std::size_t>(f)], emb_[static_cast<std::size_t>(g)], false, p);
    e.vf = vf;
    e.vg = vg;
    e.ok = base;
    e.margin = -1.0;
    if (!base) return false;
    if (pair_ok(f, g, p, r, rng_for(f, g, 0))) {
      e.margin = r;
      return true;
    }
    return false;
  }

  bool full_ok(int child, int k, const std::vector<int>& S, const Vec& p, double r) const {
    std::vector<Covector> all;
    for (int f : S) all.insert(all.end(), raw_[static_cast<std::size_t>(f)].begin(), raw_[static_cast<std::size_t>(f)].end());
    if (!o_.full(HyperplaneConfig::lifted(all), p)) return false;
    if (r <= 0.0) return true;
    CounterRng rng = rng_for(child, child, k);
    for (int s = 0; s < margin_samples_; ++s) {
      std::vector<Covector> moved;
      for (const auto& c : all) moved.push_back(perturb_covector(c, r, rng));
      if (!o_.full(HyperplaneConfig::lifted(moved), p)) return false;
    }
    return true;
  }

  const CubicalCover& cover_;
  PreparedOracle o_;
  std::uint64_t seed_;
  int margin_samples_;
  int per_axis_;
  std::vector<std::vector<Vec>> raw_;
  std::vector<std::vector<Vec>> emb_;
  std::vector<unsigned> ver_;
  std::vector<unsigned> next_ver_;
  std::vector<UnaryEntry> unary_memo_;
  std::vector<std::vector<PairEntry>> pair_memo_;
};

std::vector<HyperplaneConfig> frames_of(const Engine& e, std::size_t N) {
  std::vector<HyperplaneConfig> out;
  out.reserve(N);
  for (std::size_t f = 0; f < N; ++f) out.push_back(HyperplaneConfig::lifted(e.raw(static_cast<int>(f))));
  return out;
}

struct StepOutcome {
  char moved = 0;
  int tries = 0;
};

}  // namespace

JiggleResult jiggle(const CubicalCover& cover, const Oracle& oracle, const JetForms& F, const JiggleConfig& cfg) {
  if (cover.children.empty()) throw Error("cover has no children");
  if (cfg.max_tries < 1) throw Error("max_tries must be positive");
  if (cfg.margin_samples < 0) throw Error("margin_samples must be non-negative");
  const std::size_t N = cover.children.size();
  JiggleResult res;
  res.schedule = make_schedule(cfg.eps0, cfg.A, cover.n_colors);
  res.color_sup.assign(static_cast<std::size_t>(cover.n_colors), 0.0);
  res.frame_total.assign(N, 0.0);

  Engine eng(cover, oracle.prepare(F), cfg.seed, cfg.margin_samples, cfg.probes_per_axis);
  std::vector<std::vector<int>> by_color(static_cast<std::size_t>(cover.n_colors));
  for (std::size_t u = 0; u < N; ++u) by_color[static_cast<std::size_t>(cover.colors[u])].push_back(static_cast<int>(u));

  for (int color = 0; color < cover.n_colors; ++color) {
    const auto& kids = by_color[static_cast<std::size_t>(color)];
    const double eps = res.schedule.eps(static_cast<std::size_t>(color));
    const double margin = res.schedule.margin(static_cast<std::size_t>(color));
    std::vector<double> disp(N, 0.0);
    auto step = [&](std::size_t idx) {
      const int u = kids[idx];
      StepOutcome out;
      if (eng.child_ok(u, margin)) return out;
      const auto hood = cover.closed_neighborhood(u);
      std::vector<std::vector<Vec>> orig;
      std::vector<unsigned> orig_ver;
      for (int f : hood) {
        orig.push_back(eng.raw(f));
        orig_ver.push_back(eng.version(f));
      }
      CounterRng base = make_rng(cfg.seed, Stream::Jiggle).split(static_cast<std::uint64_t>(u));
      for (int t = 0; t < cfg.max_tries; ++t) {
        CounterRng rng = base.split(static_cast<std::uint64_t>(t));
        ++out.tries;
        for (std::size_t h = 0; h < hood.size(); ++h) {
          std::vector<Vec> moved;
          for (const auto& c : orig[h]) moved.push_back(perturb_covector(c, eps, rng));
          eng.set_frame(hood[h], std::move(moved));
        }
        if (eng.child_ok(u, margin)) {
          for (std::size_t h = 0; h < hood.size(); ++h) {
            double d = 0.0;
            for (std::size_t k = 0; k < orig[h].size(); ++k)
              d = std::max(d, projective_distance(orig[h][k], eng.raw(hood[h])[k]));
            disp[static_cast<std::size_t>(hood[h])] = d;
          }
          out.moved = 1;
          return out;
        }
      }
      for (std::size_t h = 0; h < hood.size(); ++h) eng.restore_frame(hood[h], orig[h], orig_ver[h]);
      throw JiggleError(u, color);
    };
    auto outs = kernels::index_map<StepOutcome>(kids.size(), step, kernels::mode_of(cfg.parallel));
    for (const auto& o : outs) {
      res.perturbed_steps += o.moved;
      res.tries += o.tries;
    }
    for (std::size_t f = 0; f < N; ++f) {
      res.frame_total[f] += disp[f];
      res.color_sup[static_cast<std::size_t>(color)] = std::max(res.color_sup[static_cast<std::size_t>(color)], disp[f]);
    }
    if (cfg.after_color) cfg.after_color(color, frames_of(eng, N));
  }
  res.frames = frames_of(eng, N);
  for (double t : res.frame_total) res.total_sup = std::max(res.total_sup, t);
  return res;
}

VerifyReport verify_jiggle(const JiggleResult& result, const CubicalCover& cover, const Oracle& oracle,
                           const JetForms& F, int probes_per_axis, bool keep_records) {
  if (result.frames.size() != cover.children.size()) throw Error("result does not match the cover");
  CubicalCover c2 = cover;
  for (std::size_t f = 0; f < c2.children.size(); ++f) c2.children[f].frame = result.frames[f];
  Engine eng(c2, oracle.prepare(F), 0, 0, probes_per_axis);
  VerifyReport r;
  r.schedule_ok = schedule_ok(result.schedule.log_eps, result.schedule.A);
  for (std::size_t u = 0; u < c2.children.size(); ++u) {
    auto ps = eng.probes(static_cast<int>(u));
    bool child_failed = false;
    for (std::size_t k = 0; k < ps.size(); ++k) {
      bool ok = eng.probe_ok(static_cast<int>(u), static_cast<int>(k), ps[k], 0.0);
      ++r.probes;
      if (ok) ++r.passed;
      else {
        ++r.failed;
        child_failed = true;
      }
      if (keep_records) r.records.push_back({static_cast<int>(u), static_cast<int>(k), ps[k], ok});
    }
    if (child_failed) r.failing_children.push_back(static_cast<int>(u));
  }
  return r;
}

std::string probes_csv(const VerifyReport& report) {
  std::ostringstream os;
  os.precision(17);
  int n = report.records.empty() ? 0 : static_cast<int>(report.records.front().point.size());
  os << "child,probe";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  os << ",pass\r\n";
  for (const auto& rec : report.records) {
    os << rec.child << ',' << rec.probe;
    for (int i = 0; i < n; ++i) os << ',' << rec.point(i);
    os << ',' << (rec.pass ? 1 : 0) << "\r\n";
  }
  return os.str();
}

}  // namespace amplex
