#include <doctest.h>

#include "generators.hpp"
#include "qp/reduce.hpp"

using qp::ErrorCode;
using qp::QMTransform;
using qp::QPMap;
using qp::Rational;
using qp::RationalMatrix;
using qp::RationalVector;
using qp::State;
using qp::StepKind;

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

QPMap worked_example() {
  return QPMap::create({1, 2, 0}, RationalMatrix{{1, 0, 2}, {0, 1, 1}, {0, 0, 0}},
                       RationalMatrix{{1, 1, 1}, {1, 1, 0}, {1, 0, 0}});
}

}  // namespace

TEST_CASE("evaluate_constant") {
  CHECK(qp::evaluate_constant({{0, 0}, std::nullopt}, State{3.0, 5.0}) == 1.0);
  CHECK(qp::evaluate_constant({{1, -1}, std::nullopt}, State{6.0, 3.0}) == doctest::Approx(2.0));
}

TEST_CASE("merge_degenerate_qms") {
  const auto merged = qp::merge_degenerate_qms(
      {1, 2}, RationalMatrix{{1, 2, 3}, {4, 5, 6}}, RationalMatrix{{1, 1}, {1, 1}, {1, 0}});
  CHECK(merged.B() == RationalMatrix{{1, 1}, {1, 0}});
  CHECK(merged.A() == RationalMatrix{{3, 3}, {9, 6}});
  CHECK(merged.lambda() == RationalVector{1, 2});

  const auto all = qp::merge_degenerate_qms({0}, RationalMatrix{{1, 2, 3}},
                                            RationalMatrix{{2}, {2}, {2}});
  CHECK(all.m() == 1);
  CHECK(all.A() == RationalMatrix{{6}});

  const auto map = QPMap::create({1}, RationalMatrix{{1, 2}}, RationalMatrix{{1}, {2}});
  CHECK(qp::merge_degenerate_qms(map) == map);
}

TEST_CASE("step 1 removes the kernel of B") {
  const auto map = QPMap::create({0, 0}, RationalMatrix{{1}, {1}}, RationalMatrix{{1, 0}});
  const auto out = qp::reduce_step1(map);
  REQUIRE(out.has_value());
  CHECK(out->map.n() == 1);
  CHECK(out->map.B() == RationalMatrix{{1}});
  CHECK(out->record.decoupled == std::vector<std::size_t>{1});
  CHECK(out->record.q_factors.empty());

  CHECK_FALSE(qp::reduce_step1(QPMap::create({1}, RationalMatrix{{1}}, RationalMatrix{{1}})));

  const auto three = QPMap::create({1, 2, 3}, RationalMatrix{{1}, {1}, {1}}, RationalMatrix{{1, 1, 1}});
  const auto out3 = qp::reduce_step1(three);
  REQUIRE(out3.has_value());
  CHECK(out3->map.n() == 1);
  CHECK(out3->record.decoupled.size() == 2);
  const auto& C = out3->record.transform->C();
  CHECK(C.col(1) == RationalVector{1, -1, 0});
  CHECK(C.col(2) == RationalVector{1, 0, -1});
  CHECK(out3->map.is_non_redundant());
}

TEST_CASE("step 2 handles rank-deficient square B") {
  const auto map = QPMap::create({1, 2}, RationalMatrix{{3, 4}, {5, 7}}, RationalMatrix{{1, 2}, {2, 4}});
  const auto out = qp::reduce_step2(map);
  REQUIRE(out.has_value());
  CHECK(out->map.n() == 1);
  CHECK(out->record.working_rank == 1);
  CHECK(qp::rank(out->map.B()) == 1);
  CHECK_FALSE(qp::reduce_step2(QPMap::create({1}, RationalMatrix{{1}}, RationalMatrix{{1}})));

  const auto merged = qp::merge_degenerate_qms({1, 1}, RationalMatrix{{1, 2, 3}, {4, 5, 6}},
                                               RationalMatrix{{1, 1}, {2, 2}, {1, 1}});
  CHECK(merged.m() == 2);
  const auto out2 = qp::reduce_step2(merged);
  REQUIRE(out2.has_value());
  CHECK(out2->map.n() == 1);
  CHECK(out2->map.m() <= 2);
}

TEST_CASE("step 3 on the worked example") {
  const auto out = qp::reduce_step3(worked_example());
  REQUIRE(out.has_value());
  CHECK(out->record.transform->C() == RationalMatrix::identity(3));
  CHECK(out->record.decoupled == std::vector<std::size_t>{2});
  REQUIRE(out->merge.has_value());
  CHECK(out->merge->merged_groups == std::vector<std::vector<std::size_t>>{{0, 1}});
  CHECK(out->map.B() == RationalMatrix{{1, 1}, {1, 0}});
  CHECK(out->map.A() == RationalMatrix{{1, 2}, {1, 1}});
  CHECK(out->map.lambda() == RationalVector{1, 2});
}

TEST_CASE("step 3 keeps the q factors from the initial state") {
  // y3 = 2 at p = 0, so quasimonomials 1 and 2 pick up q = 2 and 1.
  const auto out = qp::reduce_step3(worked_example(), State{1.0, 1.0, 2.0});
  REQUIRE(out.has_value());
  CHECK(out->record.q_factors == std::vector<double>{2.0, 1.0, 1.0});
  CHECK(out->map.A() == RationalMatrix{{2, 2}, {1, 1}});
  REQUIRE(out->record.constants.size() == 1);
  CHECK(*out->record.constants[0].value == doctest::Approx(2.0));
}

TEST_CASE("step 3 extracts a constant from proportional rows of M") {
  const auto map = QPMap::create({1, 2}, RationalMatrix{{1, 0}, {2, 0}}, RationalMatrix::identity(2));
  const auto out = qp::reduce_step3(map);
  REQUIRE(out.has_value());
  CHECK(out->map.n() == 1);
  REQUIRE(out->record.constants.size() == 1);
  const auto& c = out->record.constants[0];
  CHECK(c.exponents == RationalVector{1, Rational(-1, 2)});

  const auto small = QPMap::create({Rational(1, 10), Rational(1, 5)},
                                   RationalMatrix{{Rational(-1, 10), 0}, {Rational(-1, 5), 0}},
                                   RationalMatrix::identity(2));
  const auto c2 = qp::reduce_step3(small)->record.constants.at(0);
  const auto traj = qp::iterate(small, State{0.8, 1.7}, 100);
  const double c0 = qp::evaluate_constant(c2, traj.front());
  for (const auto& x : traj) CHECK(qp::evaluate_constant(c2, x) == doctest::Approx(c0).epsilon(1e-12));

  CHECK_FALSE(qp::reduce_step3(QPMap::create({1}, RationalMatrix{{1}}, RationalMatrix{{1}})));
  CHECK(code_of([] {
          qp::reduce_step3(QPMap::create({1, 1}, RationalMatrix{{1}, {1}}, RationalMatrix{{1, 0}}));
        }) == ErrorCode::RankDeficientInput);
}

TEST_CASE("reduce: non-redundant input is left alone") {
  const auto map = QPMap::create({1, 2}, RationalMatrix{{1, 0}, {0, 1}}, RationalMatrix::identity(2));
  const auto report = qp::reduce(map);
  CHECK(report.steps.empty());
  CHECK(report.final == map);
  CHECK(report.constants.empty());
}

TEST_CASE("reduce: worked example") {
  const auto report = qp::reduce(worked_example());
  CHECK(report.final.B() == RationalMatrix{{1, 1}, {1, 0}});
  CHECK(report.final.is_non_redundant());
  CHECK(qp::replay(report) == report.final);
  REQUIRE(report.constants.size() == 1);
  CHECK(report.constants[0].exponents == RationalVector{0, 0, 1});
  CHECK(report.log_projection == RationalMatrix{{1, 0, 0}, {0, 1, 0}});
}

TEST_CASE("reduce: a rank-deficient M after a kernel step") {
  // x3 is absent from every quasimonomial; x2 never moves.
  const auto map = QPMap::create({1, 0, 5}, RationalMatrix{{1, 1}, {0, 0}, {2, 3}},
                                 RationalMatrix{{1, 1, 0}, {2, -1, 0}});
  const auto report = qp::reduce(map, State{1.2, 0.9, 3.0});
  CHECK(report.final.n() == 1);
  CHECK(report.final.is_non_redundant());
  CHECK(qp::replay(report) == report.final);
  REQUIRE(report.steps.size() >= 2);
  CHECK(report.steps[0].kind == StepKind::Step1);
}

TEST_CASE("embed") {
  const auto map = QPMap::create({1}, RationalMatrix{{3, 4}}, RationalMatrix{{1}, {2}});
  const auto e = qp::embed(map);
  CHECK(e.B() == RationalMatrix{{1, 1}, {2, 0}});
  CHECK(qp::rank(e.B()) == 2);
  CHECK(e.M().row(1) == RationalVector{0, 0, 0});
  CHECK(code_of([] { qp::embed(QPMap::create({1}, RationalMatrix{{1}}, RationalMatrix{{1}})); }) ==
        ErrorCode::NotApplicable);
  CHECK(qp::embed_state(State{0.5}, 3) == State{0.5, 1.0, 1.0});
}

TEST_CASE("LV canonical form") {
  const auto lv = QPMap::create({1, 2}, RationalMatrix{{1, 0}, {0, 1}}, RationalMatrix::identity(2));
  const auto same = qp::to_lv_canonical(lv);
  CHECK(same.lotka_volterra == lv);
  CHECK(same.constants.empty());
  CHECK_FALSE(same.embedded.has_value());

  const auto scaled = QPMap::create({2, 1}, RationalMatrix::identity(2), RationalMatrix{{2, 0}, {0, 1}});
  const auto cf = qp::to_lv_canonical(scaled);
  CHECK(cf.lotka_volterra.B() == RationalMatrix::identity(2));
  CHECK(cf.lotka_volterra.M() == RationalMatrix{{4, 2, 0}, {1, 0, 1}});

  const auto redundant = QPMap::create({1, 1}, RationalMatrix{{1}, {1}}, RationalMatrix{{1, 1}});
  CHECK(code_of([&] { qp::to_lv_canonical(redundant); }) == ErrorCode::NotNonRedundant);
}

TEST_CASE("LV canonical form of a 1-D map with two quasimonomials") {
  const auto map = QPMap::create({Rational(1, 10)}, RationalMatrix{{Rational(-1, 20), Rational(-1, 40)}},
                                 RationalMatrix{{1}, {2}});
  const auto cf = qp::to_lv_canonical(map);
  CHECK(cf.lotka_volterra.n() == 2);
  CHECK(cf.lotka_volterra.B() == RationalMatrix::identity(2));
  CHECK(cf.lotka_volterra.M() == qp::class_invariant(map));
  REQUIRE(cf.constants.size() == 1);

  const State x0{0.9};
  const auto xs = qp::iterate(map, x0, 20);
  const auto zs = qp::iterate(cf.lotka_volterra, qp::phi(cf.transform, qp::embed_state(x0, 2)), 20);
  for (std::size_t p = 0; p <= 20; ++p) {
    const auto back = qp::phi_inverse(cf.transform, zs[p]);
    CHECK(back[0] == doctest::Approx(xs[p][0]).epsilon(1e-12));
    CHECK(back[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(qp::evaluate_constant(cf.constants[0], zs[p]) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("property: reduce yields non-redundant maps and replays exactly") {
  qptest::Gen g;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(g.integer(1, 5));
    const auto m = static_cast<std::size_t>(g.integer(1, 5));
    // Low-rank M and B with repeated structure force every step.
    const auto rM = static_cast<std::size_t>(g.integer(1, static_cast<int>(n)));
    const RationalMatrix M = g.integer_matrix(n, rM, -2, 2) * g.integer_matrix(rM, m + 1, -2, 2);
    RationalMatrix B = g.integer_matrix(m, n, -1, 2);
    RationalVector lambda = M.col(0);
    RationalMatrix A = M.block(0, 1, n, m);
    const auto map = qp::merge_degenerate_qms(lambda, A, B);
    if (map.m() == 0) continue;
    qp::ReductionReport report = [&] {
      try {
        return qp::reduce(map);
      } catch (const qp::Error& e) {
        FAIL_CHECK("reduce threw " << e.what());
        throw;
      }
    }();
    const auto& fin = report.final;
    if (fin.m() == 0) continue;
    CHECK(fin.is_non_redundant());
    CHECK(qp::replay(report) == fin);
    CHECK(qp::class_invariant(fin).rows() == fin.m());
    for (const auto& rec : report.steps) {
      if (rec.kind == StepKind::Merge) continue;
      CHECK(rec.decoupled.size() == rec.n_before - rec.working_rank);
      CHECK((rec.kind == StepKind::Step3 || rec.q_factors.empty()));
    }
    if (!report.constants.empty()) {
      std::vector<RationalVector> rows;
      for (const auto& c : report.constants) rows.push_back(c.exponents);
      CHECK(qp::rank(RationalMatrix::from_rows(rows, n)) == rows.size());
    }
  }
}

TEST_CASE("property: inflate then reduce returns to the core's class") {
  qptest::Gen g;
  for (int trial = 0; trial < 60; ++trial) {
    const auto n0 = static_cast<std::size_t>(g.integer(1, 2));
    const auto m0 = static_cast<std::size_t>(g.integer(static_cast<int>(n0), 3));
    const auto core = g.non_redundant(n0, m0);
    const auto inf = qptest::inflate(g, core, static_cast<std::size_t>(g.integer(0, 2)),
                                     static_cast<std::size_t>(g.integer(0, 2)));
    const auto report = qp::reduce(inf.mixed);
    CHECK(report.final.n() == n0);
    CHECK(report.final.m() == m0);
    CHECK(report.final.is_non_redundant());
    CHECK(qp::replay(report) == report.final);
    // Steps 1 and 2 keep Rank(B) variables; step 3 trims the rest down to n0.
    CHECK(report.constants.size() == qp::rank(inf.mixed.B()) - n0);
    CHECK_NOTHROW(qp::same_class(core, report.final));
  }
}
