#include "tscmrar/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "tscmrar/error.hpp"
#include "tscmrar/random.hpp"

namespace tscmrar {

namespace {

double evaluate(const LossFn& model_fn) {
  Tape tape;
  return tape.scalar(model_fn(tape));
}

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradientCheckReport gradient_check(const LossFn& model_fn,
                                   std::span<ParamTensor> params,
                                   std::size_t probe_count, std::uint64_t seed,
                                   double h) {
  if (probe_count == 0) throw DataError("gradient_check: probe_count must be >= 1");
  std::size_t total = 0;
  for (const auto& p : params) total += p.value.size();
  if (total == 0) throw DataError("gradient_check: no parameters to probe");

  for (auto& p : params) p.zero_grad();
  {
    Tape tape;
    Var loss = model_fn(tape);
    const double first = tape.scalar(loss);
    if (evaluate(model_fn) != first) {
      throw NumericError("gradient_check: model function is not deterministic");
    }
    tape.backward(loss);
  }

  GradientCheckReport report;
  Rng rng(seed);
  for (std::size_t probe = 0; probe < probe_count; ++probe) {
    std::size_t flat = static_cast<std::size_t>(rng.below(total));
    std::size_t which = 0;
    while (flat >= params[which].value.size()) flat -= params[which++].value.size();
    ParamTensor& p = params[which];

    const double original = p.value[flat];
    p.value[flat] = original + h;
    const double plus = evaluate(model_fn);
    p.value[flat] = original - h;
    const double minus = evaluate(model_fn);
    p.value[flat] = original;

    GradientProbe result{.param = p.name, .index = flat, .analytic = p.grad[flat]};
    result.numeric = (plus - minus) / (2.0 * h);
    result.rel_error = relative_error(result.analytic, result.numeric);
    report.max_rel_error = std::max(report.max_rel_error, result.rel_error);
    report.probes.push_back(std::move(result));
  }
  return report;
}

}  // namespace tscmrar
