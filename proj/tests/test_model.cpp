#include <doctest.h>

#include <cmath>
#include <numeric>

#include "generators.hpp"
#include "qp/model.hpp"

using qp::ErrorCode;
using qp::QPMap;
using qp::Rational;
using qp::RationalMatrix;
using qp::State;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const qp::Error& e) {
    return e.code();
  }
  FAIL("expected qp::Error");
  return ErrorCode::Internal;
}

QPMap lv1(int lambda, int a) {
  return QPMap::create({lambda}, RationalMatrix{{a}}, RationalMatrix{{1}});
}

}  // namespace

TEST_CASE("State rejects non-positive and non-finite components") {
  CHECK(code_of([] { State{1.0, 0.0}; }) == ErrorCode::NonPositiveState);
  CHECK(code_of([] { State{-1.0}; }) == ErrorCode::NonPositiveState);
  CHECK(code_of([] { State{std::nan("")}; }) == ErrorCode::NonPositiveState);
  CHECK(code_of([] { State{HUGE_VAL}; }) == ErrorCode::NonPositiveState);
}

TEST_CASE("QPMap construction checks shapes and duplicate rows") {
  CHECK(code_of([] { QPMap::create({1, 2}, RationalMatrix{{1}}, RationalMatrix{{1, 0}}); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([] {
          QPMap::create({1}, RationalMatrix{{1, 1}}, RationalMatrix{{2}, {2}});
        }) == ErrorCode::DuplicateQuasimonomial);
  const auto map = QPMap::create({1, 2}, RationalMatrix{{3}, {4}}, RationalMatrix{{1, 0}});
  CHECK(map.M() == RationalMatrix{{1, 3}, {2, 4}});
  CHECK(map.n() == 2);
  CHECK(map.m() == 1);
  CHECK_FALSE(map.is_non_redundant());
  CHECK(lv1(1, -1).is_lotka_volterra());
}

TEST_CASE("quasimonomials") {
  const State x{2.0, 3.0};
  auto q = qp::quasimonomials(QPMap::create({0, 0}, RationalMatrix(2, 2), RationalMatrix::identity(2)), x);
  CHECK(q[0] == doctest::Approx(2.0));
  CHECK(q[1] == doctest::Approx(3.0));
  q = qp::quasimonomials(QPMap::create({0, 0}, RationalMatrix(2, 2), RationalMatrix{{1, 1}, {1, 0}}), x);
  CHECK(q[0] == doctest::Approx(6.0));
  CHECK(q[1] == doctest::Approx(2.0));
  q = qp::quasimonomials(QPMap::create({0, 0}, RationalMatrix(2, 1), RationalMatrix{{-1, 2}}), x);
  CHECK(q[0] == doctest::Approx(4.5));
}

TEST_CASE("single steps of the 1-D LV map") {
  CHECK(qp::step(QPMap::create({0}, RationalMatrix{{0}}, RationalMatrix{{1}}), State{5.0})[0] == 5.0);
  CHECK(qp::step(lv1(1, -1), State{1.0})[0] == 1.0);
  CHECK(qp::step(lv1(1, -1), State{2.0})[0] == doctest::Approx(0.7357588823).epsilon(1e-10));
}

TEST_CASE("iterate") {
  const auto zero = QPMap::create({0, 0}, RationalMatrix(2, 1), RationalMatrix{{1, 1}});
  for (const auto& x : qp::iterate(zero, State{0.3, 4.0}, 10)) CHECK(x == State{0.3, 4.0});

  for (const auto& x : qp::iterate(lv1(1, -1), State{1.0}, 5)) CHECK(x[0] == 1.0);

  const auto traj = qp::iterate(lv1(1, -1), State{2.0}, 2);
  REQUIRE(traj.size() == 3);
  const double x1 = 2.0 * std::exp(-1.0);
  CHECK(traj[1][0] == doctest::Approx(x1).epsilon(1e-14));
  CHECK(traj[2][0] == doctest::Approx(x1 * std::exp(1.0 - x1)).epsilon(1e-14));
}

TEST_CASE("overflow is reported with the failing step") {
  const auto growth = lv1(0, 3);
  try {
    qp::iterate(growth, State{2.0}, 10);
    FAIL("expected overflow");
  } catch (const qp::Error& e) {
    CHECK(e.code() == ErrorCode::Overflow);
    REQUIRE(e.step().has_value());
    CHECK(*e.step() == 2);
  }
}

TEST_CASE("jacobian closed forms") {
  const auto zero = QPMap::create({0, 0}, RationalMatrix(2, 2), RationalMatrix::identity(2));
  const auto J0 = qp::jacobian(zero, State{0.7, 1.3});
  CHECK(J0(0, 0) == 1.0);
  CHECK(J0(0, 1) == 0.0);
  CHECK(J0(1, 1) == 1.0);
  CHECK(qp::jacobian(lv1(1, -1), State{1.0})(0, 0) == doctest::Approx(0.0));
  CHECK(qp::jacobian(lv1(1, -1), State{2.0})(0, 0) == doctest::Approx(-std::exp(-1.0)));
}

TEST_CASE("interior fixed points") {
  CHECK(qp::find_interior_fixed_point(lv1(1, -1))[0] == doctest::Approx(1.0));
  const auto lv2 = QPMap::create({1, 1}, RationalMatrix{{-1, 0}, {0, -2}}, RationalMatrix::identity(2));
  const auto x = qp::find_interior_fixed_point(lv2);
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(0.5));
  CHECK(code_of([] { qp::find_interior_fixed_point(lv1(1, 1)); }) == ErrorCode::NotFound);
  CHECK(code_of([] {
          qp::find_interior_fixed_point(
              QPMap::create({1}, RationalMatrix{{1, 1}}, RationalMatrix{{1}, {2}}));
        }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("property: positivity of every iterate") {
  qptest::Gen g;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(1, 4));
    const auto m = static_cast<std::size_t>(g.integer(static_cast<int>(n), 5));
    const auto map = g.non_redundant(n, m);
    for (int k = 0; k < 10; ++k) {
      const State x = g.state(n);
      State y = x;
      try {
        y = qp::step(map, x);
      } catch (const qp::Error& e) {
        CHECK(e.code() == ErrorCode::Overflow);
        continue;
      }
      for (double v : y.values()) CHECK(v > 0.0);
    }
  }
}

TEST_CASE("property: B = I quasimonomials return the state") {
  qptest::Gen g;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(1, 5));
    const auto map = QPMap::create(g.vector(n), g.matrix(n, n), RationalMatrix::identity(n));
    const auto x = g.state(n);
    const auto q = qp::quasimonomials(map, x);
    for (std::size_t i = 0; i < n; ++i) CHECK(q[i] == doctest::Approx(x[i]).epsilon(1e-15));
  }
}

TEST_CASE("property: jacobian matches central differences") {
  qptest::Gen g;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(1, 4));
    const auto m = static_cast<std::size_t>(g.integer(1, 4));
    RationalMatrix B(m, n);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < n; ++k) B(j, k) = g.rational(2, 2);
    QPMap map = [&] {
      for (;;) {
        try {
          return QPMap::create(g.vector(n, 2, 2), g.matrix(n, m, 2, 2), B);
        } catch (const qp::Error&) {
          for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < n; ++k) B(j, k) = g.rational(2, 2);
        }
      }
    }();
    const auto x = g.state(n);
    const auto J = qp::jacobian(map, x);
    for (std::size_t l = 0; l < n; ++l) {
      const double h = 1e-6 * x[l];
      auto plus = x.values();
      auto minus = x.values();
      plus[l] += h;
      minus[l] -= h;
      const auto fp = qp::step(map, State(plus));
      const auto fm = qp::step(map, State(minus));
      for (std::size_t i = 0; i < n; ++i) {
        const double fd = (fp[i] - fm[i]) / (2 * h);
        const double scale = std::max({std::abs(J(i, l)), std::abs(fd), 1.0});
        CHECK(std::abs(fd - J(i, l)) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("property: step commutes with variable permutations") {
  qptest::Gen g;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(2, 4));
    const auto m = static_cast<std::size_t>(g.integer(1, 4));
    const auto B = g.full_rank_exponents(m, 1, [&] { return g.rational(1, 2); });
    RationalMatrix Bn(m, n);
    for (std::size_t j = 0; j < m; ++j) {
      Bn(j, 0) = B(j, 0);
      for (std::size_t k = 1; k < n; ++k) Bn(j, k) = g.rational(1, 2);
    }
    const auto lambda = g.vector(n, 1, 4);
    const auto A = g.matrix(n, m, 1, 4);
    const auto map = QPMap::create(lambda, A, Bn);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.engine());

    qp::RationalVector pl(n);
    for (std::size_t i = 0; i < n; ++i) pl[i] = lambda[perm[i]];
    const auto pmap = QPMap::create(pl, A.select_rows(perm), Bn.select_cols(perm));

    const auto x = g.state(n);
    std::vector<double> px(n);
    for (std::size_t i = 0; i < n; ++i) px[i] = x[perm[i]];
    const auto fx = qp::step(map, x);
    const auto fpx = qp::step(pmap, State(px));
    for (std::size_t i = 0; i < n; ++i) CHECK(fpx[i] == doctest::Approx(fx[perm[i]]).epsilon(1e-14));
  }
}
