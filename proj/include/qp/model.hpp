#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qp/linalg.hpp"

namespace qp {

/// Point in the open positive orthant. Construction rejects any component
/// that is not finite and strictly positive.
class State {
 public:
  State() = default;
  explicit State(std::vector<double> x);
  State(std::initializer_list<double> x) : State(std::vector<double>(x)) {}

  std::size_t size() const noexcept { return x_.size(); }
  double operator[](std::size_t i) const { return x_[i]; }
  const std::vector<double>& values() const noexcept { return x_; }
  std::vector<double> logs() const;

  friend bool operator==(const State&, const State&) = default;

 private:
  std::vector<double> x_;
};

using Trajectory = std::vector<State>;

/// Row-major dense double matrix, used for Jacobians.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Discrete-time quasipolynomial mapping
///   x_i' = x_i exp(lambda_i + sum_j A_ij prod_k x_k^B_jk).
/// Coefficients are exact; double copies are cached for evaluation.
class QPMap {
 public:
  /// Throws DimensionMismatch on inconsistent shapes and
  /// DuplicateQuasimonomial when two rows of B coincide.
  static QPMap create(RationalVector lambda, RationalMatrix A, RationalMatrix B);

  std::size_t n() const noexcept { return lambda_.size(); }
  std::size_t m() const noexcept { return B_.rows(); }

  const RationalVector& lambda() const noexcept { return lambda_; }
  const RationalMatrix& A() const noexcept { return A_; }
  const RationalMatrix& B() const noexcept { return B_; }

  /// (lambda | A), n x (m+1).
  RationalMatrix M() const;

  bool is_lotka_volterra() const { return m() == n() && B_ == RationalMatrix::identity(n()); }

  /// m >= n and Rank(B) = Rank(M) = n.
  bool is_non_redundant() const;

  const std::vector<double>& lambda_values() const noexcept { return lambda_d_; }
  const std::vector<double>& A_values() const noexcept { return A_d_; }
  const std::vector<double>& B_values() const noexcept { return B_d_; }

  friend bool operator==(const QPMap& a, const QPMap& b) {
    return a.lambda_ == b.lambda_ && a.A_ == b.A_ && a.B_ == b.B_;
  }

 private:
  QPMap(RationalVector lambda, RationalMatrix A, RationalMatrix B);

  RationalVector lambda_;
  RationalMatrix A_;
  RationalMatrix B_;
  std::vector<double> lambda_d_;
  std::vector<double> A_d_;
  std::vector<double> B_d_;
};

/// Continuous-time QP system with rates per unit time. Its coefficient
/// triple is stored as a QPMap purely as a container; it is never stepped.
class QPFlow {
 public:
  static QPFlow create(RationalVector lambda_star, RationalMatrix A_star, RationalMatrix B);
  explicit QPFlow(QPMap rates) : rates_(std::move(rates)) {}

  std::size_t n() const noexcept { return rates_.n(); }
  std::size_t m() const noexcept { return rates_.m(); }
  const RationalVector& lambda_star() const noexcept { return rates_.lambda(); }
  const RationalMatrix& A_star() const noexcept { return rates_.A(); }
  const RationalMatrix& B() const noexcept { return rates_.B(); }
  RationalMatrix M_star() const { return rates_.M(); }

  const QPMap& rates() const noexcept { return rates_; }

  friend bool operator==(const QPFlow& a, const QPFlow& b) { return a.rates_ == b.rates_; }

 private:
  QPMap rates_;
};

struct StepOptions {
  /// Largest |argument| accepted by exp() before reporting divergence.
  double exponent_bound = 700.0;
};

/// q_j = prod_k x_k^B_jk, evaluated as exp(sum_k B_jk ln x_k).
std::vector<double> quasimonomials(const QPMap& map, const State& s,
                                   const StepOptions& opts = {});

/// lambda + A q(x), the exponent of the multiplicative update.
std::vector<double> field(const QPMap& map, const State& s, const StepOptions& opts = {});

State step(const QPMap& map, const State& s, const StepOptions& opts = {});

/// trajectory[0] = s0, trajectory[k+1] = step(trajectory[k]). On failure the
/// error's step() is the index of the iterate that could not be produced.
Trajectory iterate(const QPMap& map, const State& s0, std::size_t steps,
                   const StepOptions& opts = {});

DenseMatrix jacobian(const QPMap& map, const State& s, const StepOptions& opts = {});

/// Requires m = n. Solves lambda + A q = 0 exactly, then B ln x = ln q.
/// Throws NotFound if A or B is singular or some q_j <= 0.
State find_interior_fixed_point(const QPMap& map);

}  // namespace qp
