#include "amplex/exterior.hpp"

#include <bit>
#include <cmath>

namespace amplex {

namespace {

constexpr int kMaxDim = 16;

std::vector<int> indices_of(std::uint32_t mask) {
  std::vector<int> out;
  for (int i = 0; i < 32; ++i)
    if (mask & (1u << i)) out.push_back(i);
  return out;
}

void collect(int dim, int degree, int start, std::uint32_t acc, std::vector<std::uint32_t>& out) {
  if (degree == 0) {
    out.push_back(acc);
    return;
  }
  for (int i = start; i <= dim - degree; ++i) collect(dim, degree - 1, i + 1, acc | (1u << i), out);
}

}  // namespace

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

std::vector<std::uint32_t> masks_of_degree(int dim, int degree) {
  std::vector<std::uint32_t> out;
  if (degree < 0 || degree > dim) return out;
  collect(dim, degree, 0, 0u, out);
  return out;
}

int wedge_sign(std::uint32_t a, std::uint32_t b) {
  if (a & b) return 0;
  int inversions = 0;
  for (std::uint32_t rest = b; rest; rest &= rest - 1) {
    int j = std::countr_zero(rest);
    inversions += std::popcount(j >= 31 ? 0u : (a >> (j + 1)));
  }
  return (inversions % 2) ? -1 : 1;
}

Form::Form(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 0 || dim > kMaxDim) throw DimensionError("form dimension out of range");
  if (degree < 0 || degree > dim) throw DimensionError("form degree out of range");
  c_.assign(std::size_t{1} << dim, 0.0);
}

Form Form::covector(const Vec& c) {
  Form f(static_cast<int>(c.size()), 1);
  for (Eigen::Index i = 0; i < c.size(); ++i) f.c_[1u << i] = c(i);
  return f;
}

Form Form::two_form(const Mat& skew) {
  if (skew.rows() != skew.cols()) throw DimensionError("two-form matrix not square");
  const int n = static_cast<int>(skew.rows());
  Form f(n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) f.c_[(1u << i) | (1u << j)] = skew(i, j);
  return f;
}

Form Form::volume(int dim) {
  Form f(dim, dim);
  f.c_[(std::size_t{1} << dim) - 1] = 1.0;
  return f;
}

Form Form::wedge(const Form& other) const {
  if (dim_ != other.dim_) throw DimensionError("wedge of forms on different spaces");
  if (degree_ + other.degree_ > dim_) return Form(dim_, dim_) * 0.0;
  Form out(dim_, degree_ + other.degree_);
  const auto ma = masks_of_degree(dim_, degree_);
  const auto mb = masks_of_degree(dim_, other.degree_);
  for (auto a : ma) {
    double ca = c_[a];
    if (ca == 0.0) continue;
    for (auto b : mb) {
      double cb = other.c_[b];
      if (cb == 0.0 || (a & b)) continue;
      out.c_[a | b] += wedge_sign(a, b) * ca * cb;
    }
  }
  return out;
}

Form Form::operator+(const Form& other) const {
  if (dim_ != other.dim_ || degree_ != other.degree_) throw DimensionError("adding unlike forms");
  Form out = *this;
  for (std::size_t i = 0; i < c_.size(); ++i) out.c_[i] += other.c_[i];
  return out;
}

Form Form::operator-(const Form& other) const { return *this + other * -1.0; }

Form Form::operator*(double s) const {
  Form out = *this;
  for (auto& v : out.c_) v *= s;
  return out;
}

Vec Form::coefficients() const {
  const auto masks = masks_of_degree(dim_, degree_);
  Vec v(static_cast<Eigen::Index>(masks.size()));
  for (std::size_t i = 0; i < masks.size(); ++i) v(static_cast<Eigen::Index>(i)) = c_[masks[i]];
  return v;
}

double Form::top() const {
  if (degree_ != dim_) return 0.0;
  return c_[(std::size_t{1} << dim_) - 1];
}

double Form::norm() const {
  double s = 0;
  for (double v : c_) s += v * v;
  return std::sqrt(s);
}

Mat Form::to_skew() const {
  if (degree_ != 2) throw DimensionError("not a two-form");
  Mat m = Mat::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = i + 1; j < dim_; ++j) {
      m(i, j) = c_[(1u << i) | (1u << j)];
      m(j, i) = -m(i, j);
    }
  return m;
}

Form Form::pullback(const Mat& basis) const {
  if (basis.rows() != dim_) throw DimensionError("pullback basis has wrong ambient size");
  const int k = static_cast<int>(basis.cols());
  if (degree_ > k) return Form(k, k) * 0.0;
  Form out(k, degree_);
  const auto old_masks = masks_of_degree(dim_, degree_);
  const auto new_masks = masks_of_degree(k, degree_);
  for (auto s : new_masks) {
    auto cols = indices_of(s);
    double acc = 0.0;
    for (auto t : old_masks) {
      double c = c_[t];
      if (c == 0.0) continue;
      auto rows = indices_of(t);
      Mat minor(degree_, degree_);
      for (int a = 0; a < degree_; ++a)
        for (int b = 0; b < degree_; ++b) minor(a, b) = basis(rows[a], cols[b]);
      acc += c * (degree_ == 0 ? 1.0 : minor.determinant());
    }
    out.c_[s] = acc;
  }
  return out;
}

}  // namespace amplex
