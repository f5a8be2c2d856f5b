#pragma once
// Small linear-algebra helpers: exact rank via rational elimination, float orthonormal bases via Eigen.

#include <Eigen/Dense>

#include <vector>

#include "scalar.hpp"

namespace reluid::linalg {

// Incremental exact row echelon form; add() reports whether a row is independent of the rows so far.
class ExactEchelon {
 public:
  explicit ExactEchelon(std::size_t dim) : dim_(dim) {}

  template <class T>
  bool add(const std::vector<T>& v) {
    std::vector<Rational> r(v.begin(), v.end());
    reduce(r);
    std::size_t piv = 0;
    while (piv < dim_ && sgn(r[piv]) == 0) ++piv;
    if (piv == dim_) return false;
    Rational inv = 1 / r[piv];
    for (auto& x : r) x *= inv;
    rows_.push_back(std::move(r));
    pivots_.push_back(piv);
    return true;
  }
  // true when v lies in the span
  template <class T>
  bool contains(const std::vector<T>& v) const {
    std::vector<Rational> r(v.begin(), v.end());
    reduce(r);
    for (const auto& x : r)
      if (sgn(x) != 0) return false;
    return true;
  }
  std::size_t rank() const { return rows_.size(); }

 private:
  void reduce(std::vector<Rational>& r) const {
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      if (sgn(r[pivots_[k]]) == 0) continue;
      Rational f = r[pivots_[k]];
      for (std::size_t j = 0; j < dim_; ++j)
        if (sgn(rows_[k][j]) != 0) r[j] -= f * rows_[k][j];
    }
  }

  std::size_t dim_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<std::size_t> pivots_;
};

template <class T>
std::size_t exact_rank(const std::vector<std::vector<T>>& rows, std::size_t dim) {
  ExactEchelon e(dim);
  for (const auto& r : rows) e.add(r);
  return e.rank();
}

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Orthonormal basis (columns) of the span of the given columns; rank threshold rel * sigma_max.
inline Mat orthonormal_basis(const Mat& cols, double rel = 1e-9) {
  if (cols.cols() == 0) return Mat(cols.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(cols, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s.size() > 0 && s(0) > 0)
    while (r < s.size() && s(r) > rel * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

// Orthonormal basis of the orthogonal complement of span(basis) in R^n (basis has orthonormal columns).
inline Mat orthogonal_complement(const Mat& basis, Eigen::Index n) {
  if (basis.cols() == 0) return Mat::Identity(n, n);
  Mat P = Mat::Identity(n, n) - basis * basis.transpose();
  // P is a projector: singular values are 0 or 1 up to rounding
  Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > 0.5) ++r;
  return svd.matrixU().leftCols(r);
}

inline std::size_t numeric_rank(const Mat& m, double rel = 1e-9) {
  return static_cast<std::size_t>(orthonormal_basis(m, rel).cols());
}

}  // namespace reluid::linalg
