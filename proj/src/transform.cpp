#include "qp/transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qp/error.hpp"
#include "qp/reduce.hpp"

namespace qp {

QMTransform::QMTransform(RationalMatrix C) : C_(std::move(C)) {
  if (C_.rows() != C_.cols())
    throw Error(ErrorCode::DimensionMismatch, "QM transform matrix must be square");
  C_.canonicalize();
  C_inv_ = qp::inverse(C_);
}

QPMap apply_qm(const QPMap& map, const QMTransform& t) {
  if (t.n() != map.n())
    throw Error(ErrorCode::DimensionMismatch,
                "transform is " + std::to_string(t.n()) + "x" + std::to_string(t.n()) +
                    " but map has n = " + std::to_string(map.n()));
  const auto& Ci = t.C_inverse();
  return merge_degenerate_qms(Ci * map.lambda(), Ci * map.A(), map.B() * t.C());
}

QPFlow apply_qm(const QPFlow& flow, const QMTransform& t) {
  return QPFlow(apply_qm(flow.rates(), t));
}

namespace {

State power_map(const RationalMatrix& E, const State& x) {
  if (E.cols() != x.size())
    throw Error(ErrorCode::DimensionMismatch, "state size does not match transform");
  const auto e = E.to_doubles();
  const auto logs = x.logs();
  const std::size_t n = x.size();
  std::vector<double> y(E.rows());
  for (std::size_t i = 0; i < E.rows(); ++i) {
    double arg = 0.0;
    std::size_t nonzero = 0;
    std::size_t last = 0;
    for (std::size_t j = 0; j < n; ++j) {
      arg += e[i * n + j] * logs[j];
      if (e[i * n + j] != 0.0) ++nonzero, last = j;
    }
    // Unit rows copy the coordinate, so permutations are exact.
    y[i] = nonzero == 1 && e[i * n + last] == 1.0 ? x[last] : std::exp(arg);
    if (!(y[i] > 0.0) || !std::isfinite(y[i]))
      throw Error(ErrorCode::Overflow, "quasimonomial image left double range");
  }
  return State(std::move(y));
}

double relative_sup_distance(const State& a, const State& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(a[i]));
  }
  return scale == 0.0 ? diff : diff / scale;
}

}  // namespace

State phi(const QMTransform& t, const State& x) { return power_map(t.C_inverse(), x); }

State phi_inverse(const QMTransform& t, const State& y) { return power_map(t.C(), y); }

double conjugacy_residual_unchecked(const QPMap& mapF, const QPMap& mapG,
                                    const QMTransform& t, const State& s) {
  const State lhs = phi(t, step(mapF, s));
  const State rhs = step(mapG, phi(t, s));
  return relative_sup_distance(lhs, rhs);
}

double conjugacy_residual(const QPMap& mapF, const QPMap& mapG, const QMTransform& t,
                          const State& s) {
  if (!(apply_qm(mapF, t) == mapG))
    throw Error(ErrorCode::NotSameClass,
                "second map is not the QM transform of the first under the given C");
  return conjugacy_residual_unchecked(mapF, mapG, t, s);
}

RationalMatrix class_invariant(const QPMap& map) { return map.B() * map.M(); }

QMTransform same_class(const QPMap& map1, const QPMap& map2) {
  if (map1.n() != map2.n() || map1.m() != map2.m())
    throw Error(ErrorCode::DimensionMismatch,
                "class comparison needs equal n and m (got n=" + std::to_string(map1.n()) +
                    ",m=" + std::to_string(map1.m()) + " vs n=" + std::to_string(map2.n()) +
                    ",m=" + std::to_string(map2.m()) + ")");
  if (!map1.is_non_redundant() || !map2.is_non_redundant())
    throw Error(ErrorCode::NotNonRedundant,
                "class comparison needs non-redundant maps; run reduce first");

  if (class_invariant(map1) != class_invariant(map2))
    throw Error(ErrorCode::NotSameClass, "class invariants B*M differ");

  // B has full column rank: n independent rows determine C, the remaining
  // rows confirm it.
  const auto rows = independent_rows(map1.B());
  const RationalMatrix C =
      inverse(map1.B().select_rows(rows)) * map2.B().select_rows(rows);
  if (map1.B() * C != map2.B())
    throw Error(ErrorCode::NotSameClass, "B C = B' has no solution");
  QMTransform t(C);
  if (t.C_inverse() * map1.M() != map2.M())
    throw Error(ErrorCode::NotSameClass, "C^-1 M differs from M'");
  return t;
}

}  // namespace qp
