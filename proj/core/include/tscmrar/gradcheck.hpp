#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tscmrar/tape.hpp"

namespace tscmrar {

// Records a scalar loss on the given tape. Must register the checked
// parameters through Tape::param() and be deterministic.
using LossFn = std::function<Var(Tape&)>;

struct GradientProbe {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradientCheckReport {
  std::vector<GradientProbe> probes;
  double max_rel_error = 0.0;
};

// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

// Compares backward() against central differences (step h) at `probe_count`
// scalar parameters drawn uniformly over all elements of `params`. Leaves
// parameter values unchanged and gradients holding the analytic result.
// Throws NumericError if two identical forward passes disagree.
GradientCheckReport gradient_check(const LossFn& model_fn,
                                   std::span<ParamTensor> params,
                                   std::size_t probe_count, std::uint64_t seed,
                                   double h = 1e-5);

}  // namespace tscmrar
