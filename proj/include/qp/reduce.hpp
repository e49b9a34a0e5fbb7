#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "qp/model.hpp"
#include "qp/transform.hpp"

namespace qp {

/// Conserved quantity prod_k x_k^e_k. The exponents refer to the variables
/// of the map it was extracted from.
struct ConstantOfMotion {
  RationalVector exponents;
  /// Value on the supplied initial state, when one was supplied.
  std::optional<double> value;
};

double evaluate_constant(const ConstantOfMotion& c, const State& s);

enum class StepKind { Step1, Step2, Step3, Merge, Embed };

std::string_view to_string(StepKind kind);

struct StepRecord {
  StepKind kind = StepKind::Step1;
  /// Transform applied before decoupling the trailing variables.
  std::optional<QMTransform> transform;
  std::size_t n_before = 0;
  std::size_t m_before = 0;
  std::size_t n_after = 0;
  std::size_t m_after = 0;
  /// Rank r that sets how many variables are retained.
  std::size_t working_rank = 0;
  /// Indices (0-based, in transformed variables) of the removed variables.
  std::vector<std::size_t> decoupled;
  /// Step3 only: q_j = prod_{k >= r} y_k(0)^B'_jk scaling column j of A'.
  std::vector<double> q_factors;
  /// Step3 only: constants in the step's input variables.
  std::vector<ConstantOfMotion> constants;
  /// Merge only: groups of pre-merge quasimonomial indices that collapsed.
  std::vector<std::vector<std::size_t>> merged_groups;
  /// Merge only: post-merge quasimonomials with an all-zero exponent row,
  /// folded into lambda.
  std::vector<std::size_t> folded_constant_qms;
};

struct StepOutcome {
  QPMap map;
  StepRecord record;
  /// Present when decoupling produced coincident or constant quasimonomials.
  std::optional<StepRecord> merge;
};

struct ReductionReport {
  QPMap original;
  QPMap final;
  std::vector<StepRecord> steps;
  /// Constants expressed in the original variables.
  std::vector<ConstantOfMotion> constants;
  /// ln(final variables) = log_projection * ln(original variables).
  RationalMatrix log_projection;
};

/// Collapses equal rows of B (keeping first occurrence order) and sums the
/// matching columns of A.
QPMap merge_degenerate_qms(const RationalVector& lambda, const RationalMatrix& A,
                           const RationalMatrix& B);
QPMap merge_degenerate_qms(const QPMap& map);

/// m < n: decouple the n - Rank(B) variables spanned by Ker(B).
std::optional<StepOutcome> reduce_step1(const QPMap& map);

/// m >= n, Rank(B) < n: same construction as step 1.
std::optional<StepOutcome> reduce_step2(const QPMap& map);

/// m >= n, Rank(B) = n, Rank(M) = r < n: transform so the last n - r rows of
/// M vanish, decouple those constant variables. `initial` (in the map's
/// variables) sets the q_j factors; without it they are 1.
std::optional<StepOutcome> reduce_step3(const QPMap& map,
                                        const std::optional<State>& initial = std::nullopt);

ReductionReport reduce(const QPMap& map, const std::optional<State>& initial = std::nullopt);

/// Re-applies the recorded steps to report.original.
QPMap replay(const ReductionReport& report);

/// m > n, Rank(B) = n: append m - n constant variables with zero dynamics and
/// complete B to an invertible m x m matrix.
QPMap embed(const QPMap& map);

struct CanonicalForm {
  QPMap lotka_volterra;
  /// z = phi(transform, x) for m = n, or of the embedded state for m > n.
  QMTransform transform;
  std::optional<QPMap> embedded;
  /// m > n only: constants in the LV variables whose level set {1,...,1}
  /// carries the original dynamics.
  std::vector<ConstantOfMotion> constants;
  std::vector<StepRecord> steps;
};

/// Requires m >= n and Rank(B) = n; throws NotNonRedundant otherwise.
CanonicalForm to_lv_canonical(const QPMap& map);

/// Pads a state with m - n ones, the level set used by embed.
State embed_state(const State& s, std::size_t m);

}  // namespace qp
