#pragma once

#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <vector>

#include "qp/rational.hpp"

namespace qp {

/// Dense row-major matrix of exact rationals.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols);
  RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows);

  static RationalMatrix identity(std::size_t n);
  static RationalMatrix column(const RationalVector& v);
  static RationalMatrix from_rows(const std::vector<RationalVector>& rows,
                                  std::size_t cols);
  static RationalMatrix from_columns(const std::vector<RationalVector>& columns,
                                     std::size_t rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  Rational& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  /// Reduces every entry to lowest terms (mpq_class(p, q) does not).
  void canonicalize();
  const Rational& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  RationalVector row(std::size_t i) const;
  RationalVector col(std::size_t j) const;

  RationalMatrix transpose() const;
  RationalMatrix block(std::size_t row0, std::size_t col0, std::size_t nrows,
                       std::size_t ncols) const;
  RationalMatrix select_rows(const std::vector<std::size_t>& indices) const;
  RationalMatrix select_cols(const std::vector<std::size_t>& indices) const;

  /// Row-major conversion to double precision.
  std::vector<double> to_doubles() const;

  bool is_zero() const;

  friend bool operator==(const RationalMatrix& a, const RationalMatrix& b);
  friend bool operator!=(const RationalMatrix& a, const RationalMatrix& b) {
    return !(a == b);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
RationalVector operator*(const RationalMatrix& a, const RationalVector& v);
RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b);
RationalMatrix operator*(const Rational& s, const RationalMatrix& a);

RationalMatrix hstack(const RationalMatrix& left, const RationalMatrix& right);
RationalMatrix vstack(const RationalMatrix& top, const RationalMatrix& bottom);

std::ostream& operator<<(std::ostream& os, const RationalMatrix& m);

/// Reduced row echelon form with the indices of its pivot columns.
struct EchelonForm {
  RationalMatrix rref;
  std::vector<std::size_t> pivots;
};

/// Fraction-free (Bareiss) forward elimination on integer-scaled rows,
/// followed by exact back substitution.
EchelonForm row_echelon(const RationalMatrix& mat);

std::size_t rank(const RationalMatrix& mat);

/// Indices of a maximal set of linearly independent columns, chosen greedily
/// in index order.
std::vector<std::size_t> independent_columns(const RationalMatrix& mat);
std::vector<std::size_t> independent_rows(const RationalMatrix& mat);

/// Basis of the right null space. Each vector's first nonzero entry is 1.
std::vector<RationalVector> kernel_basis(const RationalMatrix& mat);

/// Throws Error(SingularMatrix) if mat is singular, Error(DimensionMismatch)
/// if it is not square.
RationalMatrix inverse(const RationalMatrix& mat);

/// Where complete_to_invertible places the added standard basis vectors.
enum class Extend { RowsBelow, RowsAbove, ColumnsRight, ColumnsLeft };

/// Completes a full-row-rank (RowsBelow/RowsAbove) or full-column-rank
/// (ColumnsRight/ColumnsLeft) matrix to a square invertible one, adding the
/// first standard basis vectors that raise the rank, in index order.
RationalMatrix complete_to_invertible(const RationalMatrix& partial, Extend side);

}  // namespace qp
