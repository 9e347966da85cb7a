#pragma once

#include "amplex/linalg.hpp"

#include <cstdint>
#include <vector>

namespace amplex {

// Homogeneous k-form on R^dim, coefficients indexed by the bitmask of the
// increasing index set (dx^{i1} ^ ... ^ dx^{ik}, i1 < ... < ik).
class Form {
 public:
  Form(int dim, int degree);

  static Form covector(const Vec& c);
  static Form two_form(const Mat& skew);
  static Form volume(int dim);

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  double coeff(std::uint32_t mask) const { return c_[mask]; }
  double& coeff(std::uint32_t mask) { return c_[mask]; }

  Form wedge(const Form& other) const;
  Form operator+(const Form& other) const;
  Form operator-(const Form& other) const;
  Form operator*(double s) const;

  // Coefficients listed in the order of masks_of_degree(dim, degree).
  Vec coefficients() const;
  // Coefficient against dx^1 ^ ... ^ dx^dim.
  double top() const;
  double norm() const;

  // Skew matrix of a 2-form.
  Mat to_skew() const;

  // Pull back along the linear map whose columns are the new basis vectors.
  Form pullback(const Mat& basis) const;

 private:
  int dim_;
  int degree_;
  std::vector<double> c_;
};

// All index masks of the given popcount, ordered lexicographically by the
// increasing index tuple.
std::vector<std::uint32_t> masks_of_degree(int dim, int degree);

// Sign of dx^A ^ dx^B relative to dx^{A u B}; 0 when A and B meet.
int wedge_sign(std::uint32_t a, std::uint32_t b);

int binomial(int n, int k);

}  // namespace amplex
