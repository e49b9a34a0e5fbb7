#include "qp/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qp/error.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qp::sweep {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EnsembleOutcome run_one(const QPMap& map, const State& s0, std::size_t steps,
                        const StepOptions& opts) {
  EnsembleOutcome out{s0, 0, false};
  for (std::size_t p = 0; p < steps; ++p) {
    try {
      out.final_state = step(map, out.final_state, opts);
    } catch (const Error&) {
      out.diverged = true;
      return out;
    }
    ++out.completed_steps;
  }
  return out;
}

double residual_one(const QPMap& mapF, const QPMap& mapG, const QMTransform& t, const State& s) {
  try {
    return conjugacy_residual_unchecked(mapF, mapG, t, s);
  } catch (const Error&) {
    return kInf;
  }
}

double drift_one(const QPMap& map, std::span<const ConstantOfMotion> constants, const State& s0,
                 std::size_t steps) {
  std::vector<double> base;
  base.reserve(constants.size());
  for (const auto& c : constants) base.push_back(evaluate_constant(c, s0));
  double worst = 0.0;
  State x = s0;
  for (std::size_t p = 0; p < steps; ++p) {
    try {
      x = step(map, x);
    } catch (const Error&) {
      return kInf;
    }
    for (std::size_t k = 0; k < constants.size(); ++k)
      worst = std::max(worst, std::abs(evaluate_constant(constants[k], x) - base[k]) /
                                  std::abs(base[k]));
  }
  return worst;
}

}  // namespace

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<EnsembleOutcome> iterate_ensemble_serial(const QPMap& map,
                                                     std::span<const State> initial,
                                                     std::size_t steps, const StepOptions& opts) {
  std::vector<EnsembleOutcome> out;
  out.reserve(initial.size());
  for (const auto& s : initial) out.push_back(run_one(map, s, steps, opts));
  return out;
}

std::vector<EnsembleOutcome> iterate_ensemble(const QPMap& map, std::span<const State> initial,
                                              std::size_t steps, const StepOptions& opts) {
  const auto count = static_cast<std::ptrdiff_t>(initial.size());
  std::vector<EnsembleOutcome> out(initial.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < count; ++i) out[i] = run_one(map, initial[i], steps, opts);
  return out;
}

double max_conjugacy_residual_serial(const QPMap& mapF, const QPMap& mapG, const QMTransform& t,
                                     std::span<const State> states) {
  double worst = 0.0;
  for (const auto& s : states) worst = std::max(worst, residual_one(mapF, mapG, t, s));
  return worst;
}

double max_conjugacy_residual(const QPMap& mapF, const QPMap& mapG, const QMTransform& t,
                              std::span<const State> states) {
  const auto count = static_cast<std::ptrdiff_t>(states.size());
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i)
    worst = std::max(worst, residual_one(mapF, mapG, t, states[i]));
  return worst;
}

double max_constant_drift_serial(const QPMap& map, std::span<const ConstantOfMotion> constants,
                                 std::span<const State> initial, std::size_t steps) {
  double worst = 0.0;
  for (const auto& s : initial) worst = std::max(worst, drift_one(map, constants, s, steps));
  return worst;
}

double max_constant_drift(const QPMap& map, std::span<const ConstantOfMotion> constants,
                          std::span<const State> initial, std::size_t steps) {
  const auto count = static_cast<std::ptrdiff_t>(initial.size());
  double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < count; ++i)
    worst = std::max(worst, drift_one(map, constants, initial[i], steps));
  return worst;
}

}  // namespace qp::sweep
