#pragma once

// Ensemble kernels over independent initial states. Each kernel has a
// serial reference version; the default version is OpenMP-parallel when the
// library is built with OpenMP and must agree with the reference bit for bit.

#include <span>
#include <vector>

#include "qp/model.hpp"
#include "qp/reduce.hpp"
#include "qp/transform.hpp"

namespace qp::sweep {

struct EnsembleOutcome {
  State final_state;
  std::size_t completed_steps = 0;
  bool diverged = false;

  friend bool operator==(const EnsembleOutcome&, const EnsembleOutcome&) = default;
};

int thread_count();

std::vector<EnsembleOutcome> iterate_ensemble_serial(const QPMap& map,
                                                     std::span<const State> initial,
                                                     std::size_t steps,
                                                     const StepOptions& opts = {});
std::vector<EnsembleOutcome> iterate_ensemble(const QPMap& map, std::span<const State> initial,
                                              std::size_t steps, const StepOptions& opts = {});

/// Largest conjugacy residual over the sample; +inf if any evaluation fails.
double max_conjugacy_residual_serial(const QPMap& mapF, const QPMap& mapG, const QMTransform& t,
                                     std::span<const State> states);
double max_conjugacy_residual(const QPMap& mapF, const QPMap& mapG, const QMTransform& t,
                              std::span<const State> states);

/// Largest relative change |c(x_p) - c(x_0)| / |c(x_0)| of any constant along
/// `steps` iterates from each initial state; +inf if an orbit diverges.
double max_constant_drift_serial(const QPMap& map, std::span<const ConstantOfMotion> constants,
                                 std::span<const State> initial, std::size_t steps);
double max_constant_drift(const QPMap& map, std::span<const ConstantOfMotion> constants,
                          std::span<const State> initial, std::size_t steps);

}  // namespace qp::sweep
