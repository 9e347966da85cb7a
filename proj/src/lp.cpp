#include "amplex/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace amplex::lp {

namespace {

constexpr double kPivotTol = 1e-11;

// Dense simplex tableau in minimization form: rows 0..m-1 are constraints,
// row m holds reduced costs, the last column is the right-hand side.
class Tableau {
 public:
  Tableau(int rows, int cols) : m_(rows), n_(cols), t_(static_cast<std::size_t>(rows + 1) * (cols + 1), 0.0), basis_(static_cast<std::size_t>(rows), -1) {}

  double& at(int r, int c) { return t_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  double at(int r, int c) const { return t_[static_cast<std::size_t>(r) * (n_ + 1) + c]; }
  double& rhs(int r) { return at(r, n_); }
  int& basis(int r) { return basis_[static_cast<std::size_t>(r)]; }
  int rows() const { return m_; }
  int cols() const { return n_; }

  void pivot(int r, int e) {
    const double p = at(r, e);
    for (int c = 0; c <= n_; ++c) at(r, c) /= p;
    at(r, e) = 1.0;
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, e);
      if (f == 0.0) continue;
      double* row = &t_[static_cast<std::size_t>(i) * (n_ + 1)];
      const double* prow = &t_[static_cast<std::size_t>(r) * (n_ + 1)];
      for (int c = 0; c <= n_; ++c) row[c] -= f * prow[c];
      row[e] = 0.0;
    }
    basis(r) = e;
  }

  // Minimize the objective row; columns >= limit never enter.
  Status run(int limit, int max_iter) {
    int degenerate = 0;
    for (int it = 0; it < max_iter; ++it) {
      const bool bland = degenerate > 50;
      int e = -1;
      double best = -kPivotTol;
      for (int c = 0; c < limit; ++c) {
        double rc = at(m_, c);
        if (rc < best) {
          e = c;
          if (bland) break;
          best = rc;
        }
      }
      if (e < 0) return Status::Optimal;
      int r = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        double a = at(i, e);
        if (a <= kPivotTol) continue;
        double q = rhs(i) / a;
        if (q < ratio - 1e-14 || (q <= ratio + 1e-14 && r >= 0 && basis(i) < basis(r))) {
          ratio = q;
          r = i;
        }
      }
      if (r < 0) return Status::Unbounded;
      degenerate = ratio <= 1e-14 ? degenerate + 1 : 0;
      pivot(r, e);
    }
    return Status::IterationLimit;
  }

  Vec solution(int nvars) const {
    Vec x = Vec::Zero(nvars);
    for (int i = 0; i < m_; ++i) {
      int b = basis_[static_cast<std::size_t>(i)];
      if (b >= 0 && b < nvars) x(b) = std::max(0.0, at(i, n_));
    }
    return x;
  }

 private:
  int m_;
  int n_;
  std::vector<double> t_;
  std::vector<int> basis_;
};

int iteration_cap(int rows, int cols) { return 50 * (rows + cols) + 1000; }

}  // namespace

Result maximize_leq(const Mat& A, const Vec& b, const Vec& c) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Tableau t(m, n + m);
  for (int i = 0; i < m; ++i) {
    if (b(i) < 0) throw Error("maximize_leq needs a nonnegative right-hand side");
    for (int j = 0; j < n; ++j) t.at(i, j) = A(i, j);
    t.at(i, n + i) = 1.0;
    t.rhs(i) = b(i);
    t.basis(i) = n + i;
  }
  for (int j = 0; j < n; ++j) t.at(m, j) = -c(j);
  Result res;
  res.status = t.run(n + m, iteration_cap(m, n));
  res.x = t.solution(n);
  res.objective = c.dot(res.x);
  return res;
}

Result feasible_eq(const Mat& A, const Vec& b) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Tableau t(m, n + m);
  for (int i = 0; i < m; ++i) {
    const double s = b(i) < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) t.at(i, j) = s * A(i, j);
    t.at(i, n + i) = 1.0;
    t.rhs(i) = s * b(i);
    t.basis(i) = n + i;
  }
  // reduced costs of the phase-one objective sum(artificials)
  for (int j = 0; j <= n + m; ++j) {
    if (j >= n && j < n + m) continue;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += t.at(i, j);
    t.at(m, j) = -acc;
  }
  Result res;
  Status st = t.run(n, iteration_cap(m, n));
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (t.basis(i) >= n) infeas += std::abs(t.rhs(i));
  double scale = std::max(1.0, b.cwiseAbs().sum());
  res.x = t.solution(n);
  res.objective = infeas;
  if (st == Status::IterationLimit) res.status = st;
  else res.status = infeas <= 1e-10 * scale ? Status::Optimal : Status::Infeasible;
  return res;
}

std::optional<Vec> hull_weights(const std::vector<Vec>& points, const Vec& target) {
  if (points.empty()) return std::nullopt;
  const auto N = static_cast<Eigen::Index>(points.size());
  const Eigen::Index d = target.size();
  double scale = 0.0;
  for (const auto& p : points) {
    if (p.size() != d) throw DimensionError("hull point of wrong dimension");
    scale = std::max(scale, (p - target).cwiseAbs().maxCoeff());
  }
  if (scale == 0.0) {
    Vec w = Vec::Zero(N);
    w(0) = 1.0;
    return w;
  }
  Mat A(d + 1, N);
  for (Eigen::Index j = 0; j < N; ++j) {
    A.col(j).head(d) = (points[static_cast<std::size_t>(j)] - target) / scale;
    A(d, j) = 1.0;
  }
  Vec b = Vec::Zero(d + 1);
  b(d) = 1.0;
  Result r = feasible_eq(A, b);
  if (r.status != Status::Optimal) return std::nullopt;

  auto replay = [&](const Vec& w) {
    Vec acc = Vec::Zero(d);
    for (Eigen::Index j = 0; j < N; ++j)
      if (w(j) != 0.0) acc += w(j) * points[static_cast<std::size_t>(j)];
    return (acc - target).norm();
  };
  Vec w = r.x;
  w /= w.sum();
  if (replay(w) <= 1e-8) return w;

  // polish on the support
  std::vector<Eigen::Index> support;
  for (Eigen::Index j = 0; j < N; ++j)
    if (w(j) > 0.0) support.push_back(j);
  Mat S(d + 1, static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) S.col(static_cast<Eigen::Index>(k)) = A.col(support[k]);
  Vec ws = S.colPivHouseholderQr().solve(b);
  if ((ws.array() < -1e-12).any()) return std::nullopt;
  Vec polished = Vec::Zero(N);
  for (std::size_t k = 0; k < support.size(); ++k) polished(support[k]) = std::max(0.0, ws(static_cast<Eigen::Index>(k)));
  polished /= polished.sum();
  if (replay(polished) <= 1e-8) return polished;
  return std::nullopt;
}

Separation separate(const std::vector<Vec>& points, const Vec& target) {
  const Eigen::Index d = target.size();
  const auto N = static_cast<Eigen::Index>(points.size());
  // Work relative to the target so offsets stay small.
  double scale = 1e-300;
  for (const auto& p : points) scale = std::max(scale, (p - target).cwiseAbs().maxCoeff());
  // variables: a+ (d), a- (d), b+, b-, s
  const Eigen::Index nv = 2 * d + 3;
  const Eigen::Index rows = N + 1 + d;
  Mat A = Mat::Zero(rows, nv);
  Vec rhs = Vec::Zero(rows);
  for (Eigen::Index i = 0; i < N; ++i) {
    Vec q = (points[static_cast<std::size_t>(i)] - target) / scale;
    A.block(i, 0, 1, d) = -q.transpose();
    A.block(i, d, 1, d) = q.transpose();
    A(i, 2 * d) = -1.0;
    A(i, 2 * d + 1) = 1.0;
  }
  // l(target) + s <= 0 with target at the origin of the shifted frame
  A(N, 2 * d) = 1.0;
  A(N, 2 * d + 1) = -1.0;
  A(N, 2 * d + 2) = 1.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    A(N + 1 + j, j) = 1.0;
    A(N + 1 + j, d + j) = 1.0;
    rhs(N + 1 + j) = 1.0;
  }
  Vec c = Vec::Zero(nv);
  c(2 * d + 2) = 1.0;
  Result r = maximize_leq(A, rhs, c);
  Separation sep;
  Vec a = r.x.head(d) - r.x.segment(d, d);
  double bshift = r.x(2 * d) - r.x(2 * d + 1);
  // undo the shift and scaling: l(x) = a.(x - t)/scale + bshift, then
  // rescale so that the gradient keeps |.|_inf <= 1 in original units.
  sep.gradient = a;
  sep.offset = bshift * scale - a.dot(target);
  sep.margin = r.x(2 * d + 2) * scale;
  return sep;
}

}  // namespace amplex::lp
