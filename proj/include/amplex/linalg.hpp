#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace amplex {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point = Eigen::VectorXd;
using Covector = Eigen::VectorXd;

// Relative singular-value threshold for "dependent" and the band around it
// where predicates raise a Boundary flag.
inline constexpr double kRankTolerance = 1e-9;
inline constexpr double kBoundaryFactor = 10.0;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DependentCovectorsError : public Error {
 public:
  DependentCovectorsError(int first, int second);
  int first() const { return first_; }
  int second() const { return second_; }

 private:
  int first_;
  int second_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

struct RankReport {
  int rank = 0;
  bool boundary = false;
  double ratio = 0.0;  // smallest nonzero-candidate sigma over sigma_max
};

// Rank of the row set with the relative threshold above.
RankReport numerical_rank(const Mat& rows, double tol = kRankTolerance);

// True when the rows are linearly independent (full row rank).
bool independent_rows(const Mat& rows, bool* boundary = nullptr);

// Orthonormal basis (as columns) of the common kernel of the annihilator
// rows. Throws DependentCovectorsError naming the first offending pair.
Mat kernel_basis(const Mat& annihilators);

// Stack covectors as rows.
Mat rows_of(const std::vector<Covector>& covectors);

// Orthonormal basis of the column span, via column-pivoted QR.
Mat orthonormal_span(const Mat& columns, double tol = kRankTolerance);

// a and b proportional (or one of them zero).
bool proportional(const Vec& a, const Vec& b, double tol = kRankTolerance);

std::string format_vec(const Vec& v);

}  // namespace amplex
