#include "qp/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qp/error.hpp"

namespace qp {

Rational checked_step(Rational eps) {
  eps.canonicalize();
  if (eps <= 0) throw Error(ErrorCode::NotApplicable, "time step must be positive");
  return eps;
}

QPMap qp_discretize(const QPFlow& flow, const Rational& eps) {
  const Rational e = checked_step(eps);
  RationalVector lambda = flow.lambda_star();
  for (auto& v : lambda) v *= e;
  return QPMap::create(std::move(lambda), e * flow.A_star(), flow.B());
}

EulerMap euler_discretize(const QPFlow& flow, const Rational& eps) {
  return EulerMap(qp_discretize(flow, eps));
}

EulerImage euler_step(const EulerMap& em, const State& s) {
  const auto g = field(em.coefficients(), s);
  EulerImage out;
  out.x.resize(em.n());
  for (std::size_t i = 0; i < em.n(); ++i) {
    out.x[i] = s[i] * (1.0 + g[i]);
    if (!(out.x[i] > 0.0) || !std::isfinite(out.x[i])) out.positive = false;
  }
  return out;
}

DenseMatrix euler_jacobian(const EulerMap& em, const State& s) {
  const QPMap& c = em.coefficients();
  const std::size_t n = c.n();
  const std::size_t m = c.m();
  const auto q = quasimonomials(c, s);
  const auto g = field(c, s);
  const auto& A = c.A_values();
  const auto& B = c.B_values();
  DenseMatrix J(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += A[i * m + j] * B[j * n + l] * q[j];
      J(i, l) = (i == l ? 1.0 + g[i] : 0.0) + s[i] * sum / s[l];
    }
  return J;
}

namespace {

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double sup_norm(const std::vector<double>& a) {
  double d = 0.0;
  for (double v : a) d = std::max(d, std::abs(v));
  return d;
}

double relative_residual(const std::vector<double>& image, const State& x) {
  const double scale = sup_norm(x.values());
  return scale == 0.0 ? 0.0 : sup_distance(image, x.values()) / scale;
}

}  // namespace

std::vector<DivergencePoint> compare_discretizations(const QPFlow& flow, const Rational& eps,
                                                     const State& s0, double horizon_time) {
  const QPMap qp_map = qp_discretize(flow, eps);
  const EulerMap euler = euler_discretize(flow, eps);
  if (s0.size() != flow.n())
    throw Error(ErrorCode::DimensionMismatch, "initial state size does not match flow");

  const double h = to_double(eps);
  // Tolerate representation error in horizon/eps so 1.0/0.02 gives 50 steps.
  const auto steps = static_cast<std::size_t>(std::floor(horizon_time / h * (1.0 + 1e-12)));

  std::vector<DivergencePoint> series;
  series.reserve(steps + 1);
  State x_qp = s0;
  State x_e = s0;
  series.push_back({0, 0.0, 0.0});
  for (std::size_t p = 1; p <= steps; ++p) {
    const EulerImage e = euler_step(euler, x_e);
    if (!e.positive)
      throw Error(ErrorCode::OrbitEscaped,
                  "euler orbit left the positive orthant at step " + std::to_string(p), p);
    x_e = State(e.x);
    try {
      x_qp = step(qp_map, x_qp);
    } catch (const Error& err) {
      throw Error(ErrorCode::OrbitEscaped,
                  "qp orbit diverged at step " + std::to_string(p) + ": " + err.what(), p);
    }
    series.push_back({p, static_cast<double>(p) * h, sup_distance(x_e.values(), x_qp.values())});
  }
  return series;
}

FixedPointReport check_fixed_point_coincidence(const QPFlow& flow, const Rational& eps) {
  FixedPointReport report;
  const QPMap qp_map = qp_discretize(flow, eps);
  const EulerMap euler(qp_map);
  if (qp_map.m() != qp_map.n()) {
    report.skipped = true;
    report.reason = "fixed point solve needs m = n (got n=" + std::to_string(qp_map.n()) +
                    ", m=" + std::to_string(qp_map.m()) + ")";
    return report;
  }
  State x;
  try {
    x = find_interior_fixed_point(qp_map);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotFound) throw;
    report.skipped = true;
    report.reason = e.what();
    return report;
  }

  report.fixed_point = x;
  report.qp_residual = relative_residual(step(qp_map, x).values(), x);
  report.euler_residual = relative_residual(euler_step(euler, x).x, x);
  report.qp_jacobian = jacobian(qp_map, x);
  report.euler_jacobian = euler_jacobian(euler, x);
  report.jacobian_max_difference =
      sup_distance(report.qp_jacobian.data, report.euler_jacobian.data);
  report.coincident = report.qp_residual < kFixedPointResidualTol &&
                      report.euler_residual < kFixedPointResidualTol &&
                      report.jacobian_max_difference < kJacobianTol;
  return report;
}

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::Affine: return "affine";
    case Shape::Quadratic: return "quadratic";
    case Shape::Logistic: return "logistic";
  }
  return "unknown";
}

// Multiplicative shape functions, all with phi(0) = 1 and phi'(0) = 1.
double evaluate_shape(Shape shape, double xi) {
  switch (shape) {
    case Shape::Affine: return 1.0 + xi;
    case Shape::Quadratic: return 1.0 + xi + 0.5 * xi * xi;
    case Shape::Logistic: return 2.0 / (1.0 + std::exp(-2.0 * xi));
  }
  return 1.0;
}

DiscretizationFamily DiscretizationFamily::power_base(double a) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw Error(ErrorCode::NotApplicable, "power base must be positive");
  return {Kind::PowerBase, a, Shape::Affine};
}

std::string DiscretizationFamily::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::QPExp: return "qp-exp";
    case Kind::EulerAdd: return "euler";
    case Kind::PowerBase: os << "power-base(" << base << ")"; return os.str();
    case Kind::CustomMultiplicative: return "multiplicative-" + std::string(to_string(shape));
    case Kind::CustomAdditive: return "additive-" + std::string(to_string(shape));
  }
  return "unknown";
}

EulerImage family_step(const DiscretizationFamily& family, const QPFlow& flow,
                       const Rational& eps, const State& s) {
  const QPMap scaled = qp_discretize(flow, eps);
  const auto g = field(scaled, s);
  EulerImage out;
  out.x.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    double v = 0.0;
    switch (family.kind) {
      case DiscretizationFamily::Kind::QPExp: v = s[i] * std::exp(g[i]); break;
      case DiscretizationFamily::Kind::EulerAdd: v = s[i] * (1.0 + g[i]); break;
      case DiscretizationFamily::Kind::PowerBase: v = s[i] * std::pow(family.base, g[i]); break;
      case DiscretizationFamily::Kind::CustomMultiplicative:
        v = s[i] * evaluate_shape(family.shape, g[i]);
        break;
      case DiscretizationFamily::Kind::CustomAdditive:
        v = s[i] + (evaluate_shape(family.shape, g[i]) - 1.0);
        break;
    }
    out.x[i] = v;
    if (!(v > 0.0) || !std::isfinite(v)) out.positive = false;
  }
  return out;
}

std::vector<State> default_grid(std::size_t n) {
  static constexpr double kLevels[] = {0.5, 1.0, 2.0};
  std::vector<State> grid;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= 3;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::vector<double> x(n);
    std::size_t rest = idx;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = kLevels[rest % 3];
      rest /= 3;
    }
    grid.emplace_back(std::move(x));
  }
  return grid;
}

CommutativityVerdict check_commutativity(const QPFlow& flow, const QMTransform& t,
                                         const Rational& eps,
                                         const DiscretizationFamily& family,
                                         const std::vector<State>& grid) {
  using Kind = DiscretizationFamily::Kind;
  checked_step(eps);
  const QPFlow transformed = apply_qm(flow, t);

  CommutativityVerdict verdict;
  if (family.kind == Kind::QPExp || family.kind == Kind::PowerBase) {
    // a^xi = exp(xi ln a): the family is the QP discretization with step
    // eps ln a, and a common scalar factor commutes with C^-1.
    verdict.exact = true;
    verdict.commutes = qp_discretize(transformed, eps) == apply_qm(qp_discretize(flow, eps), t);
    if (family.kind == Kind::PowerBase)
      verdict.effective_step = to_double(eps) * std::log(family.base);
    verdict.detail = verdict.commutes ? "matrices equal exactly" : "matrices differ";
  }

  const auto points = grid.empty() ? default_grid(flow.n()) : grid;
  for (const auto& x : points) {
    ++verdict.points_evaluated;
    const EulerImage fx = family_step(family, flow, eps, x);
    const State y = phi(t, x);
    const EulerImage gy = family_step(family, transformed, eps, y);
    if (!fx.positive || !gy.positive) {
      ++verdict.points_escaped;
      continue;
    }
    const State lhs = phi(t, State(fx.x));
    const double scale = sup_norm(lhs.values());
    verdict.max_discrepancy =
        std::max(verdict.max_discrepancy, sup_distance(lhs.values(), gy.x) / scale);
  }
  if (verdict.points_escaped == verdict.points_evaluated && verdict.points_evaluated > 0)
    verdict.max_discrepancy = std::numeric_limits<double>::infinity();

  if (!verdict.exact) {
    verdict.commutes = verdict.max_discrepancy <= 1e-12;
    std::ostringstream os;
    os << "pointwise max relative discrepancy " << verdict.max_discrepancy << " over "
       << (verdict.points_evaluated - verdict.points_escaped) << " grid points";
    verdict.detail = os.str();
  }
  return verdict;
}

QPFlow lv_canonical_flow(const QPFlow& flow) {
  return QPFlow(to_lv_canonical(flow.rates()).lotka_volterra);
}

}  // namespace qp
