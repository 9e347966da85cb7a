#include "amplex/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace amplex {

DependentCovectorsError::DependentCovectorsError(int first, int second)
    : Error("dependent covectors at indices " + std::to_string(first) + " and " +
            std::to_string(second)),
      first_(first),
      second_(second) {}

RankReport numerical_rank(const Mat& rows, double tol) {
  RankReport r;
  if (rows.rows() == 0 || rows.cols() == 0) return r;
  Eigen::JacobiSVD<Mat> svd(rows);
  const Vec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return r;
  const double smax = s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    double q = s(i) / smax;
    if (q > tol) ++r.rank;
    if (q >= tol / kBoundaryFactor && q <= tol * kBoundaryFactor) r.boundary = true;
  }
  r.ratio = s(s.size() - 1) / smax;
  return r;
}

bool independent_rows(const Mat& rows, bool* boundary) {
  RankReport r = numerical_rank(rows);
  if (boundary) *boundary = r.boundary;
  return r.rank == rows.rows();
}

Mat rows_of(const std::vector<Covector>& covectors) {
  if (covectors.empty()) return Mat(0, 0);
  Mat m(static_cast<Eigen::Index>(covectors.size()), covectors.front().size());
  for (std::size_t i = 0; i < covectors.size(); ++i) {
    if (covectors[i].size() != m.cols()) throw DimensionError("covector sizes differ");
    m.row(static_cast<Eigen::Index>(i)) = covectors[i].transpose();
  }
  return m;
}

Mat orthonormal_span(const Mat& columns, double tol) {
  if (columns.cols() == 0) return Mat(columns.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(columns);
  qr.setThreshold(tol);
  Eigen::Index r = qr.rank();
  Mat q = qr.householderQ() * Mat::Identity(columns.rows(), r);
  return q;
}

namespace {

// First index j whose row is dependent on rows 0..j-1, paired with the
// earlier row carrying the largest coefficient in the dependency.
void throw_dependent_pair(const Mat& a) {
  for (Eigen::Index j = 0; j < a.rows(); ++j) {
    if (numerical_rank(a.topRows(j + 1)).rank == j + 1) continue;
    if (j == 0) throw DependentCovectorsError(0, 0);
    Mat prev = a.topRows(j).transpose();
    Vec c = prev.colPivHouseholderQr().solve(Vec(a.row(j).transpose()));
    Eigen::Index best = 0;
    c.cwiseAbs().maxCoeff(&best);
    throw DependentCovectorsError(static_cast<int>(best), static_cast<int>(j));
  }
}

}  // namespace

Mat kernel_basis(const Mat& annihilators) {
  const Eigen::Index n = annihilators.cols();
  const Eigen::Index k = annihilators.rows();
  if (k == 0) return Mat::Identity(n, n);
  if (numerical_rank(annihilators).rank < k) throw_dependent_pair(annihilators);

  Mat rowspace = orthonormal_span(annihilators.transpose());
  Mat proj = Mat::Identity(n, n) - rowspace * rowspace.transpose();

  // Greedy pivot choice on residual norms, ties to the larger index.
  const Eigen::Index want = n - k;
  std::vector<Eigen::Index> chosen;
  Mat residual = proj;
  for (Eigen::Index step = 0; step < want; ++step) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::find(chosen.begin(), chosen.end(), j) != chosen.end()) continue;
      double nrm = residual.col(j).norm();
      if (nrm >= best_norm * (1.0 - 1e-12)) {
        best = j;
        best_norm = nrm;
      }
    }
    chosen.push_back(best);
    Vec u = residual.col(best) / best_norm;
    residual -= u * (u.transpose() * residual);
  }
  std::sort(chosen.begin(), chosen.end());

  Mat basis(n, want);
  for (Eigen::Index c = 0; c < want; ++c) {
    Vec v = proj.col(chosen[static_cast<std::size_t>(c)]);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index p = 0; p < c; ++p) v -= basis.col(p).dot(v) * basis.col(p);
    basis.col(c) = v / v.norm();
  }
  return basis;
}

bool proportional(const Vec& a, const Vec& b, double tol) {
  Mat m(2, a.size());
  m.row(0) = a.transpose();
  m.row(1) = b.transpose();
  return numerical_rank(m, tol).rank < 2;
}

std::string format_vec(const Vec& v) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ')';
  return os.str();
}

}  // namespace amplex
