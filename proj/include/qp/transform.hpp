#pragma once

#include "qp/model.hpp"

namespace qp {

/// Quasimonomial change of variables x_i = prod_j y_j^C_ij, C invertible.
class QMTransform {
 public:
  /// Throws DimensionMismatch for a non-square C, SingularMatrix otherwise
  /// when C is not invertible.
  explicit QMTransform(RationalMatrix C);

  static QMTransform identity(std::size_t n) {
    return QMTransform(RationalMatrix::identity(n));
  }

  std::size_t n() const noexcept { return C_.rows(); }
  const RationalMatrix& C() const noexcept { return C_; }
  const RationalMatrix& C_inverse() const noexcept { return C_inv_; }

  /// Transform equivalent to applying *this first, then next: C = C1 * C2.
  QMTransform then(const QMTransform& next) const { return QMTransform(C_ * next.C_); }

  QMTransform inverse() const { return QMTransform(C_inv_); }

  friend bool operator==(const QMTransform& a, const QMTransform& b) { return a.C_ == b.C_; }

 private:
  RationalMatrix C_;
  RationalMatrix C_inv_;
};

/// A' = C^-1 A, B' = B C, lambda' = C^-1 lambda; duplicate rows of B C are
/// merged.
QPMap apply_qm(const QPMap& map, const QMTransform& t);
QPFlow apply_qm(const QPFlow& flow, const QMTransform& t);

/// y = phi(x), y_i = prod_j x_j^(C^-1)_ij.
State phi(const QMTransform& t, const State& x);
/// x = phi^-1(y), x_i = prod_j y_j^C_ij.
State phi_inverse(const QMTransform& t, const State& y);

/// Relative sup-norm mismatch |phi(F(x)) - G(phi(x))| / |phi(F(x))|.
/// Throws NotSameClass unless mapG equals apply_qm(mapF, t) exactly.
double conjugacy_residual(const QPMap& mapF, const QPMap& mapG, const QMTransform& t,
                          const State& s);

/// Same quantity without the structural check; used to measure how far an
/// arbitrary pair of maps is from being conjugate through t.
double conjugacy_residual_unchecked(const QPMap& mapF, const QPMap& mapG,
                                    const QMTransform& t, const State& s);

/// B * M, invariant across an equivalence class.
RationalMatrix class_invariant(const QPMap& map);

/// Decides class equivalence of two non-redundant maps with equal n and m.
/// Returns the unique C with B C = B' and C^-1 M = M'.
/// Throws DimensionMismatch, NotNonRedundant or NotSameClass.
QMTransform same_class(const QPMap& map1, const QPMap& map2);

}  // namespace qp
