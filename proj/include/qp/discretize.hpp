#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qp/model.hpp"
#include "qp/reduce.hpp"
#include "qp/transform.hpp"

namespace qp {

/// Positive time step kept exact where possible.
Rational checked_step(Rational eps);

/// lambda = eps lambda*, A = eps A*, same B.
QPMap qp_discretize(const QPFlow& flow, const Rational& eps);

/// Euler scheme x' = x (1 + lambda + A q(x)). Kept apart from QPMap because
/// it is not closed under QM transformations and may leave the orthant.
class EulerMap {
 public:
  explicit EulerMap(QPMap coefficients) : coefficients_(std::move(coefficients)) {}
  std::size_t n() const noexcept { return coefficients_.n(); }
  std::size_t m() const noexcept { return coefficients_.m(); }
  const QPMap& coefficients() const noexcept { return coefficients_; }

 private:
  QPMap coefficients_;
};

struct EulerImage {
  std::vector<double> x;
  /// True when every component is finite and strictly positive.
  bool positive = true;
};

EulerMap euler_discretize(const QPFlow& flow, const Rational& eps);
EulerImage euler_step(const EulerMap& em, const State& s);
DenseMatrix euler_jacobian(const EulerMap& em, const State& s);

struct DivergencePoint {
  std::size_t step = 0;
  double time = 0.0;
  double divergence = 0.0;  // |x_E(p) - x_QP(p)|_inf
};

/// Runs both schemes with the same eps from s0 up to physical time
/// horizon_time. Throws OrbitEscaped naming the scheme and step if either
/// orbit leaves the positive orthant or double range.
std::vector<DivergencePoint> compare_discretizations(const QPFlow& flow, const Rational& eps,
                                                     const State& s0, double horizon_time);

struct FixedPointReport {
  bool skipped = false;
  std::string reason;
  std::optional<State> fixed_point;
  double qp_residual = 0.0;
  double euler_residual = 0.0;
  DenseMatrix qp_jacobian;
  DenseMatrix euler_jacobian;
  double jacobian_max_difference = 0.0;
  bool coincident = false;
};

inline constexpr double kFixedPointResidualTol = 1e-10;
inline constexpr double kJacobianTol = 1e-12;

/// Interior fixed point of the QP discretization, checked against the Euler
/// scheme. Skips (with a reason) when m != n or no positive equilibrium.
FixedPointReport check_fixed_point_coincidence(const QPFlow& flow, const Rational& eps);

enum class Shape { Affine, Quadratic, Logistic };
std::string_view to_string(Shape shape);
double evaluate_shape(Shape shape, double xi);

struct DiscretizationFamily {
  enum class Kind { QPExp, EulerAdd, PowerBase, CustomMultiplicative, CustomAdditive };
  Kind kind = Kind::QPExp;
  double base = 0.0;  // PowerBase only, > 0
  Shape shape = Shape::Affine;

  static DiscretizationFamily qp_exp() { return {Kind::QPExp, 0.0, Shape::Affine}; }
  static DiscretizationFamily euler_add() { return {Kind::EulerAdd, 0.0, Shape::Affine}; }
  static DiscretizationFamily power_base(double a);
  static DiscretizationFamily multiplicative(Shape s) {
    return {Kind::CustomMultiplicative, 0.0, s};
  }
  static DiscretizationFamily additive(Shape s) { return {Kind::CustomAdditive, 0.0, s}; }

  std::string name() const;
};

/// One update of the family's discretization; may leave the orthant.
EulerImage family_step(const DiscretizationFamily& family, const QPFlow& flow,
                       const Rational& eps, const State& s);

struct CommutativityVerdict {
  /// Matrix-level comparison was performed and matched exactly.
  bool exact = false;
  bool commutes = false;
  /// Pointwise max relative discrepancy (families without an exact check),
  /// or the numerical confirmation for exact families.
  double max_discrepancy = 0.0;
  std::size_t points_evaluated = 0;
  std::size_t points_escaped = 0;
  /// PowerBase: the effective exponential step eps * ln(a).
  std::optional<double> effective_step;
  std::string detail;
};

/// Default grid {0.5, 1, 2}^n for pointwise comparisons.
std::vector<State> default_grid(std::size_t n);

/// Compares discretize(transform(flow)) against transform(discretize(flow)).
CommutativityVerdict check_commutativity(const QPFlow& flow, const QMTransform& t,
                                         const Rational& eps,
                                         const DiscretizationFamily& family,
                                         const std::vector<State>& grid = {});

/// LV canonical form of a flow (same matrix rules as for maps).
QPFlow lv_canonical_flow(const QPFlow& flow);

}  // namespace qp
