#include "qp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "qp/error.hpp"

namespace qp {

State::State(std::vector<double> x) : x_(std::move(x)) {
  for (std::size_t i = 0; i < x_.size(); ++i)
    if (!(x_[i] > 0.0) || !std::isfinite(x_[i]))
      throw Error(ErrorCode::NonPositiveState,
                  "state component x" + std::to_string(i + 1) + " = " +
                      std::to_string(x_[i]) + " is not strictly positive");
}

std::vector<double> State::logs() const {
  std::vector<double> out(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = std::log(x_[i]);
  return out;
}

QPMap::QPMap(RationalVector lambda, RationalMatrix A, RationalMatrix B)
    : lambda_(std::move(lambda)), A_(std::move(A)), B_(std::move(B)) {
  lambda_d_ = to_doubles(lambda_);
  A_d_ = A_.to_doubles();
  B_d_ = B_.to_doubles();
}

QPMap QPMap::create(RationalVector lambda, RationalMatrix A, RationalMatrix B) {
  const std::size_t n = lambda.size();
  const std::size_t m = B.rows();
  // An empty A (0 x 0) is accepted for m = 0 regardless of n.
  if (m == 0 && A.rows() == 0) A = RationalMatrix(n, 0);
  if (A.rows() != n || A.cols() != m || (m > 0 && B.cols() != n))
    throw Error(ErrorCode::DimensionMismatch,
                "inconsistent QP shapes: lambda " + std::to_string(n) + ", A " +
                    std::to_string(A.rows()) + "x" + std::to_string(A.cols()) + ", B " +
                    std::to_string(B.rows()) + "x" + std::to_string(B.cols()));
  if (m == 0) B = RationalMatrix(0, n);
  for (auto& v : lambda) v.canonicalize();
  A.canonicalize();
  B.canonicalize();

  std::set<std::vector<std::string>> seen;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::string> key;
    for (std::size_t k = 0; k < n; ++k) key.push_back(B(j, k).get_str());
    if (!seen.insert(key).second)
      throw Error(ErrorCode::DuplicateQuasimonomial,
                  "row " + std::to_string(j + 1) +
                      " of B repeats an earlier quasimonomial; use merge_degenerate_qms");
  }
  return QPMap(std::move(lambda), std::move(A), std::move(B));
}

RationalMatrix QPMap::M() const { return hstack(RationalMatrix::column(lambda_), A_); }

bool QPMap::is_non_redundant() const {
  return m() >= n() && rank(B_) == n() && rank(M()) == n();
}

QPFlow QPFlow::create(RationalVector lambda_star, RationalMatrix A_star, RationalMatrix B) {
  return QPFlow(QPMap::create(std::move(lambda_star), std::move(A_star), std::move(B)));
}

namespace {

void check_size(const QPMap& map, const State& s) {
  if (s.size() != map.n())
    throw Error(ErrorCode::DimensionMismatch,
                "state has " + std::to_string(s.size()) + " components, map has n = " +
                    std::to_string(map.n()));
}

double bounded_exp(double arg, const StepOptions& opts) {
  if (!(std::abs(arg) <= opts.exponent_bound))
    throw Error(ErrorCode::Overflow,
                "exponent argument " + std::to_string(arg) + " exceeds bound " +
                    std::to_string(opts.exponent_bound));
  return std::exp(arg);
}

}  // namespace

std::vector<double> quasimonomials(const QPMap& map, const State& s, const StepOptions& opts) {
  check_size(map, s);
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  const auto logs = s.logs();
  const auto& B = map.B_values();
  std::vector<double> q(m);
  for (std::size_t j = 0; j < m; ++j) {
    double arg = 0.0;
    for (std::size_t k = 0; k < n; ++k) arg += B[j * n + k] * logs[k];
    q[j] = bounded_exp(arg, opts);
  }
  return q;
}

std::vector<double> field(const QPMap& map, const State& s, const StepOptions& opts) {
  const auto q = quasimonomials(map, s, opts);
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  const auto& A = map.A_values();
  std::vector<double> g(map.lambda_values());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) g[i] += A[i * m + j] * q[j];
  return g;
}

State step(const QPMap& map, const State& s, const StepOptions& opts) {
  const auto g = field(map, s, opts);
  std::vector<double> next(map.n());
  for (std::size_t i = 0; i < map.n(); ++i) {
    next[i] = s[i] * bounded_exp(g[i], opts);
    if (!(next[i] > 0.0) || !std::isfinite(next[i]))
      throw Error(ErrorCode::Overflow,
                  "component x" + std::to_string(i + 1) + " left double range");
  }
  return State(std::move(next));
}

Trajectory iterate(const QPMap& map, const State& s0, std::size_t steps,
                   const StepOptions& opts) {
  check_size(map, s0);
  Trajectory traj;
  traj.reserve(steps + 1);
  traj.push_back(s0);
  for (std::size_t p = 0; p < steps; ++p) {
    try {
      traj.push_back(step(map, traj.back(), opts));
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(p + 1) + ": " + e.what(), p + 1);
    }
  }
  return traj;
}

DenseMatrix jacobian(const QPMap& map, const State& s, const StepOptions& opts) {
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  const auto q = quasimonomials(map, s, opts);
  const auto& A = map.A_values();
  const auto& B = map.B_values();
  std::vector<double> g(map.lambda_values());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) g[i] += A[i * m + j] * q[j];

  DenseMatrix J(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double E = bounded_exp(g[i], opts);
    for (std::size_t l = 0; l < n; ++l) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += A[i * m + j] * B[j * n + l] * q[j];
      J(i, l) = (i == l ? E : 0.0) + s[i] * E * sum / s[l];
    }
  }
  return J;
}

State find_interior_fixed_point(const QPMap& map) {
  const std::size_t n = map.n();
  if (map.m() != n)
    throw Error(ErrorCode::DimensionMismatch,
                "fixed point solve needs m = n; reduce or embed first");

  RationalMatrix Ainv;
  RationalMatrix Binv;
  try {
    Ainv = inverse(map.A());
    Binv = inverse(map.B());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix) throw;
    throw Error(ErrorCode::NotFound, std::string("no isolated interior fixed point: ") + e.what());
  }

  RationalVector q = Ainv * map.lambda();
  for (auto& v : q) v = -v;
  std::vector<double> log_q(n);
  for (std::size_t j = 0; j < n; ++j) {
    if (q[j] <= 0)
      throw Error(ErrorCode::NotFound, "quasimonomial q" + std::to_string(j + 1) + " = " +
                                           q[j].get_str() + " at the equilibrium is not positive");
    log_q[j] = std::log(to_double(q[j]));
  }

  const auto Bi = Binv.to_doubles();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double lx = 0.0;
    for (std::size_t j = 0; j < n; ++j) lx += Bi[i * n + j] * log_q[j];
    x[i] = std::exp(lx);
  }
  try {
    State fixed(std::move(x));
    const State image = step(map, fixed);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diff = std::max(diff, std::abs(image[i] - fixed[i]));
      scale = std::max(scale, std::abs(fixed[i]));
    }
    if (n > 0 && !(diff / scale < 1e-9))
      throw Error(ErrorCode::NotFound, "fixed point residual too large in double precision");
    return fixed;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotFound) throw;
    throw Error(ErrorCode::NotFound, "fixed point lies outside double range");
  }
}

}  // namespace qp
