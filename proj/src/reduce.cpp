#include "qp/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "qp/error.hpp"

namespace qp {

std::string_view to_string(StepKind kind) {
  switch (kind) {
    case StepKind::Step1: return "Step1";
    case StepKind::Step2: return "Step2";
    case StepKind::Step3: return "Step3";
    case StepKind::Merge: return "Merge";
    case StepKind::Embed: return "Embed";
  }
  return "Unknown";
}

double evaluate_constant(const ConstantOfMotion& c, const State& s) {
  if (c.exponents.size() != s.size())
    throw Error(ErrorCode::DimensionMismatch, "constant of motion and state sizes differ");
  const auto logs = s.logs();
  double arg = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) arg += to_double(c.exponents[k]) * logs[k];
  return std::exp(arg);
}

namespace {

struct Merged {
  QPMap map;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> folded;
};

Merged merge_rows(const RationalVector& lambda, const RationalMatrix& A,
                  const RationalMatrix& B, bool fold_constants) {
  const std::size_t n = lambda.size();
  const std::size_t m = B.rows();
  if (A.rows() != n || A.cols() != m || (m > 0 && B.cols() != n))
    throw Error(ErrorCode::DimensionMismatch, "inconsistent shapes in quasimonomial merge");

  std::map<std::vector<std::string>, std::size_t> index;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::string> key;
    for (std::size_t k = 0; k < n; ++k) key.push_back(B(j, k).get_str());
    auto [it, inserted] = index.emplace(std::move(key), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(j);
  }

  RationalVector new_lambda = lambda;
  std::vector<RationalVector> b_rows;
  std::vector<RationalVector> a_cols;
  std::vector<std::size_t> folded;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    RationalVector col(n);
    for (auto j : groups[g])
      for (std::size_t i = 0; i < n; ++i) col[i] += A(i, j);
    RationalVector row = B.row(groups[g].front());
    const bool constant_qm =
        std::all_of(row.begin(), row.end(), [](const Rational& v) { return v == 0; });
    if (fold_constants && constant_qm) {
      for (std::size_t i = 0; i < n; ++i) new_lambda[i] += col[i];
      folded.push_back(g);
      continue;
    }
    b_rows.push_back(std::move(row));
    a_cols.push_back(std::move(col));
  }

  QPMap map = QPMap::create(std::move(new_lambda), RationalMatrix::from_columns(a_cols, n),
                            RationalMatrix::from_rows(b_rows, n));
  return {std::move(map), std::move(groups), std::move(folded)};
}

bool merge_changed(const Merged& merged, std::size_t m_before) {
  return merged.groups.size() != m_before || !merged.folded.empty();
}

// Shared tail of all three steps: transform, keep the first r variables,
// scale A' columns by q, then merge and fold quasimonomials.
StepOutcome decouple(const QPMap& map, StepKind kind, const QMTransform& t, std::size_t r,
                     const std::vector<double>& q) {
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  const auto& Ci = t.C_inverse();
  const RationalVector lambda_t = Ci * map.lambda();
  const RationalMatrix A_t = Ci * map.A();
  const RationalMatrix B_t = map.B() * t.C();

  RationalVector lambda_hat(lambda_t.begin(), lambda_t.begin() + static_cast<std::ptrdiff_t>(r));
  RationalMatrix A_hat = A_t.block(0, 0, r, m);
  if (!q.empty()) {
    for (std::size_t j = 0; j < m; ++j) {
      const Rational qj = rational_from_double(q[j]);
      for (std::size_t i = 0; i < r; ++i) A_hat(i, j) *= qj;
    }
  }
  RationalMatrix B_hat = B_t.block(0, 0, m, r);

  Merged merged = merge_rows(lambda_hat, A_hat, B_hat, /*fold_constants=*/true);

  StepRecord rec;
  rec.kind = kind;
  rec.transform = t;
  rec.n_before = n;
  rec.m_before = m;
  rec.n_after = merged.map.n();
  rec.m_after = merged.map.m();
  rec.working_rank = r;
  rec.decoupled.resize(n - r);
  std::iota(rec.decoupled.begin(), rec.decoupled.end(), r);
  rec.q_factors = q;

  std::optional<StepRecord> merge;
  if (merge_changed(merged, m)) {
    StepRecord mr;
    mr.kind = StepKind::Merge;
    mr.n_before = mr.n_after = merged.map.n();
    mr.m_before = m;
    mr.m_after = merged.map.m();
    mr.working_rank = r;
    for (const auto& g : merged.groups)
      if (g.size() > 1) mr.merged_groups.push_back(g);
    mr.folded_constant_qms = merged.folded;
    merge = std::move(mr);
  }
  return {std::move(merged.map), std::move(rec), std::move(merge)};
}

// Steps 1 and 2: C = P * (I_r over 0 | kernel basis), with P a permutation
// that moves r independent columns of B to the front.
StepOutcome kernel_step(const QPMap& map, StepKind kind, std::size_t r) {
  const std::size_t n = map.n();
  std::vector<std::size_t> order = independent_columns(map.B());
  std::vector<bool> used(n, false);
  for (auto c : order) used[c] = true;
  for (std::size_t c = 0; c < n; ++c)
    if (!used[c]) order.push_back(c);

  RationalMatrix P(n, n);
  for (std::size_t k = 0; k < n; ++k) P(order[k], k) = 1;

  const auto kernel = kernel_basis(map.B() * P);
  if (kernel.size() != n - r)
    throw Error(ErrorCode::Internal, "kernel dimension does not match n - rank");
  RationalMatrix C0(n, n);
  for (std::size_t i = 0; i < r; ++i) C0(i, i) = 1;
  for (std::size_t k = 0; k < kernel.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) C0(i, r + k) = kernel[k][i];

  return decouple(map, kind, QMTransform(P * C0), r, {});
}

}  // namespace

QPMap merge_degenerate_qms(const RationalVector& lambda, const RationalMatrix& A,
                           const RationalMatrix& B) {
  return merge_rows(lambda, A, B, /*fold_constants=*/false).map;
}

QPMap merge_degenerate_qms(const QPMap& map) { return map; }

std::optional<StepOutcome> reduce_step1(const QPMap& map) {
  if (map.m() >= map.n()) return std::nullopt;
  return kernel_step(map, StepKind::Step1, rank(map.B()));
}

std::optional<StepOutcome> reduce_step2(const QPMap& map) {
  const std::size_t r = rank(map.B());
  if (map.m() < map.n() || r == map.n()) return std::nullopt;
  return kernel_step(map, StepKind::Step2, r);
}

std::optional<StepOutcome> reduce_step3(const QPMap& map, const std::optional<State>& initial) {
  const std::size_t n = map.n();
  if (map.m() < n || rank(map.B()) != n)
    throw Error(ErrorCode::RankDeficientInput, "step 3 needs m >= n and Rank(B) = n");
  const RationalMatrix M = map.M();
  const auto col_basis = independent_columns(M);
  const std::size_t r = col_basis.size();
  if (r == n) return std::nullopt;
  if (initial && initial->size() != n)
    throw Error(ErrorCode::DimensionMismatch, "initial state size does not match map");

  // Basis {v} of the column space of M completed by {w}; the projection
  // that kills span{v} is Q diag(0_r, I_{n-r}) Q^-1.
  const RationalMatrix Q = complete_to_invertible(M.select_cols(col_basis), Extend::ColumnsRight);
  RationalMatrix proj_diag(n, n);
  for (std::size_t i = r; i < n; ++i) proj_diag(i, i) = 1;
  const RationalMatrix Pi = Q * proj_diag * inverse(Q);
  const RationalMatrix Pi_R = Pi.select_rows(independent_rows(Pi));
  const RationalMatrix D = complete_to_invertible(Pi_R, Extend::RowsAbove);

  const RationalMatrix DM = D * M;
  if (!DM.block(r, 0, n - r, M.cols()).is_zero())
    throw Error(ErrorCode::Internal, "step 3 transform failed to annihilate trailing rows");

  const QMTransform t(inverse(D));

  std::vector<double> q;
  std::vector<ConstantOfMotion> constants;
  if (initial) {
    const State y0 = phi(t, *initial);
    const auto logs = y0.logs();
    const RationalMatrix B_t = map.B() * t.C();
    q.resize(map.m());
    for (std::size_t j = 0; j < map.m(); ++j) {
      double arg = 0.0;
      for (std::size_t k = r; k < n; ++k) arg += to_double(B_t(j, k)) * logs[k];
      q[j] = std::exp(arg);
    }
  }
  for (std::size_t i = r; i < n; ++i) {
    ConstantOfMotion c{D.row(i), std::nullopt};
    if (initial) c.value = evaluate_constant(c, *initial);
    constants.push_back(std::move(c));
  }

  StepOutcome out = decouple(map, StepKind::Step3, t, r, q);
  out.record.constants = std::move(constants);
  return out;
}

ReductionReport reduce(const QPMap& map, const std::optional<State>& initial) {
  if (initial && initial->size() != map.n())
    throw Error(ErrorCode::DimensionMismatch, "initial state size does not match map");

  ReductionReport report{map, map, {}, {}, RationalMatrix::identity(map.n())};
  std::optional<State> current_initial = initial;

  auto absorb = [&](StepOutcome&& out) {
    const std::size_t r = out.record.working_rank;
    const auto& t = *out.record.transform;
    const RationalMatrix Ci = t.C_inverse();
    for (const auto& c : out.record.constants) {
      const RationalMatrix lifted = RationalMatrix::from_rows({c.exponents}, c.exponents.size()) *
                                    report.log_projection;
      ConstantOfMotion oc{lifted.row(0), std::nullopt};
      if (initial) oc.value = evaluate_constant(oc, *initial);
      report.constants.push_back(std::move(oc));
    }
    report.log_projection = Ci.block(0, 0, r, Ci.cols()) * report.log_projection;
    if (current_initial) {
      const State y0 = phi(t, *current_initial);
      current_initial = State(std::vector<double>(
          y0.values().begin(), y0.values().begin() + static_cast<std::ptrdiff_t>(r)));
    }
    report.steps.push_back(std::move(out.record));
    if (out.merge) report.steps.push_back(std::move(*out.merge));
    report.final = std::move(out.map);
  };

  if (auto out = reduce_step1(report.final)) absorb(std::move(*out));
  if (auto out = reduce_step2(report.final)) absorb(std::move(*out));

  const std::size_t cap = map.n();
  std::size_t passes = 0;
  while (auto out = reduce_step3(report.final, current_initial)) {
    if (++passes > cap)
      throw Error(ErrorCode::Internal, "step 3 iteration cap exceeded");
    absorb(std::move(*out));
  }

  if (!report.final.is_non_redundant())
    throw Error(ErrorCode::Internal, "reduction ended in a redundant map");
  return report;
}

QPMap replay(const ReductionReport& report) {
  QPMap current = report.original;
  for (const auto& rec : report.steps) {
    if (rec.kind == StepKind::Merge || rec.kind == StepKind::Embed) continue;
    if (!rec.transform)
      throw Error(ErrorCode::Internal, "reduction step without a recorded transform");
    current = decouple(current, rec.kind, *rec.transform, rec.working_rank, rec.q_factors).map;
  }
  return current;
}

QPMap embed(const QPMap& map) {
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  if (m == n) throw Error(ErrorCode::NotApplicable, "embedding needs m > n");
  if (m < n || rank(map.B()) != n)
    throw Error(ErrorCode::RankDeficientInput, "embedding needs Rank(B) = n");

  RationalVector lambda = map.lambda();
  lambda.resize(m);
  const RationalMatrix A = vstack(map.A(), RationalMatrix(m - n, m));
  const RationalMatrix B = complete_to_invertible(map.B(), Extend::ColumnsRight);
  return QPMap::create(std::move(lambda), A, B);
}

State embed_state(const State& s, std::size_t m) {
  std::vector<double> x = s.values();
  if (m < x.size()) throw Error(ErrorCode::DimensionMismatch, "embedding dimension too small");
  x.resize(m, 1.0);
  return State(std::move(x));
}

CanonicalForm to_lv_canonical(const QPMap& map) {
  const std::size_t n = map.n();
  const std::size_t m = map.m();
  if (m < n || rank(map.B()) != n)
    throw Error(ErrorCode::NotNonRedundant,
                "LV canonical form needs m >= n and Rank(B) = n; run reduce first");

  if (m == n) {
    QMTransform t(inverse(map.B()));
    QPMap lv = apply_qm(map, t);
    return CanonicalForm{std::move(lv), std::move(t), std::nullopt, {}, {}};
  }

  QPMap embedded = embed(map);
  QMTransform t(inverse(embedded.B()));
  QPMap lv = apply_qm(embedded, t);

  std::vector<ConstantOfMotion> constants;
  for (std::size_t j = n; j < m; ++j) constants.push_back({t.C().row(j), 1.0});

  StepRecord rec;
  rec.kind = StepKind::Embed;
  rec.n_before = n;
  rec.m_before = m;
  rec.n_after = m;
  rec.m_after = m;
  rec.working_rank = n;
  return CanonicalForm{std::move(lv), std::move(t), std::move(embedded), std::move(constants),
                       {std::move(rec)}};
}

}  // namespace qp
