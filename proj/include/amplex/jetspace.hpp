#pragma once

#include "amplex/linalg.hpp"

#include <vector>

namespace amplex {

// Skew-symmetric matrix of a 2-form: omega = sum_{a<b} M(a,b) dx^a ^ dx^b.
class TwoForm {
 public:
  TwoForm() = default;
  // Throws unless m + m^T == 0 exactly.
  explicit TwoForm(Mat m);
  static TwoForm zero(int n) { return TwoForm(Mat::Zero(n, n)); }
  // lambda ^ beta
  static TwoForm wedge(const Covector& lambda, const Covector& beta);

  const Mat& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  TwoForm operator+(const TwoForm& o) const { return TwoForm(m_ + o.m_); }
  TwoForm operator-(const TwoForm& o) const { return TwoForm(m_ - o.m_); }
  TwoForm operator*(double s) const { return TwoForm(m_ * s); }

 private:
  Mat m_;
};

// First-order jet of an m-tuple of 1-forms on a chart of dimension n.
// derivs[i](a, b) = d_a F_{i,b}: the row is the differentiation direction,
// the column the form component. Then
//   (dF_i)_{ab} = d_a F_b - d_b F_a = derivs[i](a,b) - derivs[i](b,a),
// so a rank-one update lambda (x) beta adds lambda ^ beta to dF.
struct JetForms {
  int n = 0;
  int m = 0;
  std::vector<Vec> values;
  std::vector<Mat> derivs;

  static JetForms zero(int n, int m);
  void validate() const;

  TwoForm d(int i) const;
  std::vector<Covector> zero_jet() const { return values; }
};

bool same_shape(const JetForms& a, const JetForms& b);
double max_abs_diff(const JetForms& a, const JetForms& b);

// F with derivs[i] += lambda (x) beta_i.
JetForms principal_point(const JetForms& F, const Covector& lambda, const std::vector<Covector>& beta);

// The affine set Pr_{lambda,F}, parameterized by the m shift covectors
// stacked into one vector of length m*n.
struct PrincipalSlice {
  JetForms base;
  Covector lambda;

  int param_dim() const { return base.m * base.n; }
  JetForms at(const std::vector<Covector>& beta) const { return principal_point(base, lambda, beta); }
  JetForms at_params(const Vec& flat) const;
  std::vector<Covector> split(const Vec& flat) const;
};

struct PrincipalStep {
  Covector lambda;
  std::vector<Covector> shifts;
};

struct PrincipalPath {
  JetForms start;
  std::vector<PrincipalStep> steps;

  std::size_t length() const { return steps.size(); }
  JetForms replay() const;
};

// Covectors lambda_1..lambda_N whose r-th tensor powers form a basis of
// Sym^r. Orders 1 and 2 only.
std::vector<Covector> sym_power_basis(int n, int r);

struct Restriction {
  TwoForm form;
  Mat basis;  // orthonormal columns spanning the common kernel
};

Restriction restrict_two_form_with_basis(const TwoForm& omega, const std::vector<Covector>& annihilators);
TwoForm restrict_two_form(const TwoForm& omega, const std::vector<Covector>& annihilators);
// Restriction onto an explicit basis (columns).
TwoForm restrict_to(const TwoForm& omega, const Mat& basis);
// Pull a covector back onto an explicit basis.
Vec restrict_covector(const Covector& c, const Mat& basis);

PrincipalPath principal_path_decompose(const JetForms& F, const JetForms& G, const std::vector<Covector>& basis);

bool is_degenerate(const Covector& c);

}  // namespace amplex
