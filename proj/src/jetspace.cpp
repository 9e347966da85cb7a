#include "amplex/jetspace.hpp"

#include <cmath>

namespace amplex {

TwoForm::TwoForm(Mat m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionError("two-form matrix must be square");
  for (Eigen::Index i = 0; i < m_.rows(); ++i)
    for (Eigen::Index j = 0; j < m_.cols(); ++j)
      if (m_(i, j) != -m_(j, i)) throw DimensionError("two-form matrix is not skew-symmetric");
}

TwoForm TwoForm::wedge(const Covector& lambda, const Covector& beta) {
  if (lambda.size() != beta.size()) throw DimensionError("wedge of covectors of different size");
  Mat outer = lambda * beta.transpose();
  return TwoForm(Mat(outer - outer.transpose()));
}

JetForms JetForms::zero(int n, int m) {
  JetForms F;
  F.n = n;
  F.m = m;
  F.values.assign(static_cast<std::size_t>(m), Vec::Zero(n));
  F.derivs.assign(static_cast<std::size_t>(m), Mat::Zero(n, n));
  F.validate();
  return F;
}

void JetForms::validate() const {
  if (n < 2) throw DimensionError("jet chart dimension must be at least 2");
  if (m < 1) throw DimensionError("jet must carry at least one form");
  if (values.size() != static_cast<std::size_t>(m) || derivs.size() != static_cast<std::size_t>(m))
    throw DimensionError("jet has the wrong number of forms");
  for (int i = 0; i < m; ++i) {
    if (values[static_cast<std::size_t>(i)].size() != n) throw DimensionError("jet value has wrong size");
    const Mat& d = derivs[static_cast<std::size_t>(i)];
    if (d.rows() != n || d.cols() != n) throw DimensionError("jet derivative matrix has wrong size");
  }
}

TwoForm JetForms::d(int i) const {
  const Mat& D = derivs.at(static_cast<std::size_t>(i));
  return TwoForm(Mat(D - D.transpose()));
}

bool same_shape(const JetForms& a, const JetForms& b) { return a.n == b.n && a.m == b.m; }

double max_abs_diff(const JetForms& a, const JetForms& b) {
  if (!same_shape(a, b)) throw DimensionError("jets of different shape");
  double r = 0.0;
  for (int i = 0; i < a.m; ++i) {
    auto k = static_cast<std::size_t>(i);
    r = std::max(r, (a.values[k] - b.values[k]).cwiseAbs().maxCoeff());
    r = std::max(r, (a.derivs[k] - b.derivs[k]).cwiseAbs().maxCoeff());
  }
  return r;
}

JetForms principal_point(const JetForms& F, const Covector& lambda, const std::vector<Covector>& beta) {
  if (lambda.size() != F.n) throw DimensionError("principal direction has wrong size");
  if (beta.size() != static_cast<std::size_t>(F.m)) throw DimensionError("need one shift per form");
  JetForms out = F;
  for (int i = 0; i < F.m; ++i) {
    const Covector& b = beta[static_cast<std::size_t>(i)];
    if (b.size() != F.n) throw DimensionError("shift covector has wrong size");
    out.derivs[static_cast<std::size_t>(i)] += lambda * b.transpose();
  }
  return out;
}

std::vector<Covector> PrincipalSlice::split(const Vec& flat) const {
  if (flat.size() != param_dim()) throw DimensionError("slice parameter has wrong size");
  std::vector<Covector> beta;
  for (int i = 0; i < base.m; ++i) beta.push_back(flat.segment(i * base.n, base.n));
  return beta;
}

JetForms PrincipalSlice::at_params(const Vec& flat) const { return at(split(flat)); }

JetForms PrincipalPath::replay() const {
  JetForms cur = start;
  for (const auto& s : steps) cur = principal_point(cur, s.lambda, s.shifts);
  return cur;
}

std::vector<Covector> sym_power_basis(int n, int r) {
  if (n < 1) throw DimensionError("dimension must be positive");
  if (r < 1 || r > 2) throw UnsupportedError("principal bases are provided for orders 1 and 2 only");
  std::vector<Covector> out;
  for (int i = 0; i < n; ++i) out.push_back(Vec::Unit(n, i));
  if (r == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) out.push_back((Vec::Unit(n, i) + Vec::Unit(n, j)) / std::sqrt(2.0));
  }
  // rank check on the vectorized powers
  Mat powers(static_cast<Eigen::Index>(out.size()), r == 1 ? n : n * n);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (r == 1) {
      powers.row(static_cast<Eigen::Index>(k)) = out[k].transpose();
    } else {
      Mat t = out[k] * out[k].transpose();
      powers.row(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vec>(t.data(), n * n).transpose();
    }
  }
  if (numerical_rank(powers).rank != static_cast<int>(out.size()))
    throw Error("principal basis failed its rank check");
  return out;
}

TwoForm restrict_to(const TwoForm& omega, const Mat& basis) {
  if (basis.rows() != omega.dim()) throw DimensionError("restriction basis has wrong ambient size");
  Mat r = basis.transpose() * omega.matrix() * basis;
  // force exact skewness after rounding
  Mat s = r;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    s(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < r.cols(); ++j) {
      double v = 0.5 * (r(i, j) - r(j, i));
      s(i, j) = v;
      s(j, i) = -v;
    }
  }
  return TwoForm(s);
}

Vec restrict_covector(const Covector& c, const Mat& basis) {
  if (basis.rows() != c.size()) throw DimensionError("restriction basis has wrong ambient size");
  return basis.transpose() * c;
}

Restriction restrict_two_form_with_basis(const TwoForm& omega, const std::vector<Covector>& annihilators) {
  for (const auto& a : annihilators)
    if (a.size() != omega.dim()) throw DimensionError("annihilator has wrong size");
  Mat basis = annihilators.empty() ? Mat(Mat::Identity(omega.dim(), omega.dim())) : kernel_basis(rows_of(annihilators));
  if (annihilators.empty()) return {omega, basis};
  return {restrict_to(omega, basis), basis};
}

TwoForm restrict_two_form(const TwoForm& omega, const std::vector<Covector>& annihilators) {
  return restrict_two_form_with_basis(omega, annihilators).form;
}

PrincipalPath principal_path_decompose(const JetForms& F, const JetForms& G, const std::vector<Covector>& basis) {
  F.validate();
  G.validate();
  if (!same_shape(F, G)) throw DimensionError("jets of different shape");
  for (int i = 0; i < F.m; ++i)
    if (F.values[static_cast<std::size_t>(i)] != G.values[static_cast<std::size_t>(i)])
      throw Error("jets lie in different fibres (values differ)");
  if (basis.size() != static_cast<std::size_t>(F.n)) throw DimensionError("basis must have n covectors");
  Mat B = rows_of(basis);
  if (numerical_rank(B).rank < F.n) throw Error("basis covectors are dependent");

  PrincipalPath path;
  path.start = F;
  auto solver = B.transpose().fullPivLu();
  std::vector<Mat> shifts;
  for (int i = 0; i < F.m; ++i) {
    auto k = static_cast<std::size_t>(i);
    shifts.push_back(solver.solve(Mat(G.derivs[k] - F.derivs[k])));
  }
  for (int a = 0; a < F.n; ++a) {
    PrincipalStep step;
    step.lambda = basis[static_cast<std::size_t>(a)];
    bool nonzero = false;
    for (int i = 0; i < F.m; ++i) {
      Vec b = shifts[static_cast<std::size_t>(i)].row(a).transpose();
      nonzero = nonzero || b.cwiseAbs().maxCoeff() != 0.0;
      step.shifts.push_back(b);
    }
    if (nonzero) path.steps.push_back(std::move(step));
  }
  return path;
}

bool is_degenerate(const Covector& c) { return c.size() == 0 || c.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace amplex
