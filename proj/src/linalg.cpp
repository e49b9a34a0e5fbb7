#include "qp/linalg.hpp"

#include <algorithm>
#include <ostream>
#include <utility>

#include "qp/error.hpp"

namespace qp {

RationalMatrix::RationalMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

RationalMatrix::RationalMatrix(
    std::initializer_list<std::initializer_list<Rational>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_)
      throw Error(ErrorCode::DimensionMismatch, "ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  canonicalize();
}

void RationalMatrix::canonicalize() {
  for (auto& v : data_) v.canonicalize();
}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::column(const RationalVector& v) {
  RationalMatrix m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

RationalMatrix RationalMatrix::from_rows(const std::vector<RationalVector>& rows,
                                         std::size_t cols) {
  RationalMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols)
      throw Error(ErrorCode::DimensionMismatch, "row length mismatch");
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

RationalMatrix RationalMatrix::from_columns(const std::vector<RationalVector>& columns,
                                            std::size_t rows) {
  RationalMatrix m(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != rows)
      throw Error(ErrorCode::DimensionMismatch, "column length mismatch");
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

RationalVector RationalMatrix::row(std::size_t i) const {
  return RationalVector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                        data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
}

RationalVector RationalMatrix::col(std::size_t j) const {
  RationalVector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

RationalMatrix RationalMatrix::block(std::size_t row0, std::size_t col0,
                                     std::size_t nrows, std::size_t ncols) const {
  if (row0 + nrows > rows_ || col0 + ncols > cols_)
    throw Error(ErrorCode::DimensionMismatch, "block out of range");
  RationalMatrix b(nrows, ncols);
  for (std::size_t i = 0; i < nrows; ++i)
    for (std::size_t j = 0; j < ncols; ++j) b(i, j) = (*this)(row0 + i, col0 + j);
  return b;
}

RationalMatrix RationalMatrix::select_rows(const std::vector<std::size_t>& indices) const {
  RationalMatrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k)
    for (std::size_t j = 0; j < cols_; ++j) out(k, j) = (*this)(indices[k], j);
  return out;
}

RationalMatrix RationalMatrix::select_cols(const std::vector<std::size_t>& indices) const {
  RationalMatrix out(rows_, indices.size());
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < indices.size(); ++k) out(i, k) = (*this)(i, indices[k]);
  return out;
}

std::vector<double> RationalMatrix::to_doubles() const {
  std::vector<double> out;
  out.reserve(data_.size());
  for (const auto& v : data_) out.push_back(to_double(v));
  return out;
}

bool RationalMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Rational& v) { return v == 0; });
}

bool operator==(const RationalMatrix& a, const RationalMatrix& b) {
  return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorCode::DimensionMismatch, "matrix product shape mismatch");
  RationalMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Rational& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

RationalVector operator*(const RationalMatrix& a, const RationalVector& v) {
  if (a.cols() != v.size())
    throw Error(ErrorCode::DimensionMismatch, "matrix-vector shape mismatch");
  RationalVector out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) out[i] += a(i, k) * v[k];
  return out;
}

RationalMatrix operator+(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "matrix sum shape mismatch");
  RationalMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

RationalMatrix operator-(const RationalMatrix& a, const RationalMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "matrix difference shape mismatch");
  RationalMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

RationalMatrix operator*(const Rational& s, const RationalMatrix& a) {
  RationalMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
  return c;
}

RationalMatrix hstack(const RationalMatrix& left, const RationalMatrix& right) {
  if (left.rows() != right.rows())
    throw Error(ErrorCode::DimensionMismatch, "hstack row mismatch");
  RationalMatrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t i = 0; i < left.rows(); ++i) {
    for (std::size_t j = 0; j < left.cols(); ++j) out(i, j) = left(i, j);
    for (std::size_t j = 0; j < right.cols(); ++j) out(i, left.cols() + j) = right(i, j);
  }
  return out;
}

RationalMatrix vstack(const RationalMatrix& top, const RationalMatrix& bottom) {
  if (top.cols() != bottom.cols())
    throw Error(ErrorCode::DimensionMismatch, "vstack column mismatch");
  RationalMatrix out(top.rows() + bottom.rows(), top.cols());
  for (std::size_t j = 0; j < top.cols(); ++j) {
    for (std::size_t i = 0; i < top.rows(); ++i) out(i, j) = top(i, j);
    for (std::size_t i = 0; i < bottom.rows(); ++i) out(top.rows() + i, j) = bottom(i, j);
  }
  return out;
}

std::ostream& operator<<(std::ostream& os, const RationalMatrix& m) {
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j).get_str();
    os << ']';
  }
  return os << ']';
}

namespace {

using IntRow = std::vector<mpz_class>;

// Scale each row by the lcm of its denominators so elimination runs on integers.
std::vector<IntRow> integer_rows(const RationalMatrix& mat) {
  std::vector<IntRow> out(mat.rows(), IntRow(mat.cols()));
  for (std::size_t i = 0; i < mat.rows(); ++i) {
    mpz_class l = 1;
    for (std::size_t j = 0; j < mat.cols(); ++j)
      mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), mat(i, j).get_den_mpz_t());
    for (std::size_t j = 0; j < mat.cols(); ++j)
      out[i][j] = mat(i, j).get_num() * (l / mat(i, j).get_den());
  }
  return out;
}

// Bareiss forward elimination; rows are permuted in place. Returns pivot columns.
std::vector<std::size_t> bareiss(std::vector<IntRow>& m, std::size_t cols) {
  std::vector<std::size_t> pivots;
  const std::size_t rows = m.size();
  mpz_class prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[r], m[p]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        mpz_class t = m[r][c] * m[i][j] - m[i][c] * m[r][j];
        mpz_divexact(m[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
      }
      m[i][c] = 0;
    }
    prev = m[r][c];
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

}  // namespace

EchelonForm row_echelon(const RationalMatrix& mat) {
  auto ints = integer_rows(mat);
  auto pivots = bareiss(ints, mat.cols());

  RationalMatrix r(mat.rows(), mat.cols());
  for (std::size_t i = 0; i < pivots.size(); ++i) {
    const mpz_class& lead = ints[i][pivots[i]];
    for (std::size_t j = pivots[i]; j < mat.cols(); ++j) {
      r(i, j) = Rational(ints[i][j], lead);
      r(i, j).canonicalize();
    }
  }
  // Back substitution to clear entries above each pivot.
  for (std::size_t k = pivots.size(); k-- > 0;) {
    const std::size_t pc = pivots[k];
    for (std::size_t i = 0; i < k; ++i) {
      Rational f = r(i, pc);
      if (f == 0) continue;
      for (std::size_t j = pc; j < mat.cols(); ++j) r(i, j) -= f * r(k, j);
    }
  }
  return {std::move(r), std::move(pivots)};
}

std::size_t rank(const RationalMatrix& mat) {
  auto ints = integer_rows(mat);
  return bareiss(ints, mat.cols()).size();
}

std::vector<std::size_t> independent_columns(const RationalMatrix& mat) {
  return row_echelon(mat).pivots;
}

std::vector<std::size_t> independent_rows(const RationalMatrix& mat) {
  return row_echelon(mat.transpose()).pivots;
}

std::vector<RationalVector> kernel_basis(const RationalMatrix& mat) {
  const auto ech = row_echelon(mat);
  const std::size_t n = mat.cols();
  std::vector<bool> is_pivot(n, false);
  for (auto p : ech.pivots) is_pivot[p] = true;

  std::vector<RationalVector> basis;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    RationalVector v(n);
    v[f] = 1;
    for (std::size_t k = 0; k < ech.pivots.size(); ++k) v[ech.pivots[k]] = -ech.rref(k, f);
    auto lead = std::find_if(v.begin(), v.end(), [](const Rational& x) { return x != 0; });
    Rational scale = *lead;
    for (auto& x : v) x /= scale;
    basis.push_back(std::move(v));
  }
  return basis;
}

RationalMatrix inverse(const RationalMatrix& mat) {
  if (mat.rows() != mat.cols())
    throw Error(ErrorCode::DimensionMismatch, "inverse of a non-square matrix");
  const std::size_t n = mat.rows();
  if (n == 0) return {};
  const auto ech = row_echelon(hstack(mat, RationalMatrix::identity(n)));
  if (ech.pivots.size() < n || ech.pivots[n - 1] != n - 1)
    throw Error(ErrorCode::SingularMatrix, "matrix is singular");
  return ech.rref.block(0, n, n, n);
}

RationalMatrix complete_to_invertible(const RationalMatrix& partial, Extend side) {
  if (side == Extend::ColumnsRight || side == Extend::ColumnsLeft) {
    const Extend row_side =
        side == Extend::ColumnsRight ? Extend::RowsBelow : Extend::RowsAbove;
    return complete_to_invertible(partial.transpose(), row_side).transpose();
  }

  const std::size_t r = partial.rows();
  const std::size_t n = partial.cols();
  if (r > n || rank(partial) != r)
    throw Error(ErrorCode::RankDeficientInput,
                "basis completion needs a full-rank partial matrix");

  RationalMatrix current = partial;
  std::vector<RationalVector> added;
  for (std::size_t i = 0; i < n && current.rows() < n; ++i) {
    RationalMatrix e(1, n);
    e(0, i) = 1;
    RationalMatrix trial = vstack(current, e);
    if (rank(trial) == trial.rows()) {
      current = std::move(trial);
      added.push_back(e.row(0));
    }
  }
  RationalMatrix extra = RationalMatrix::from_rows(added, n);
  return side == Extend::RowsBelow ? vstack(partial, extra) : vstack(extra, partial);
}

}  // namespace qp
