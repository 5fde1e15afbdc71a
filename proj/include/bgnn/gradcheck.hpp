#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bgnn/matrix.hpp"
#include "bgnn/tape.hpp"

namespace bgnn {

// Builds a 1x1 scalar on `tape` from leaf Vars bound to the inputs.
using ScalarFunction = std::function<Var(Tape& tape, std::span<const Var> inputs)>;

struct GradcheckOptions {
  double eps = 1e-5;
  // Denominator floor: error = |tape - fd| / max(|tape|, |fd|, floor).
  double floor = 1e-4;
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_entry = 0;
  std::size_t coordinates = 0;
};

// Compares tape gradients of f at `inputs` against central differences
// (f(x+eps) - f(x-eps)) / (2 eps), one coordinate at a time. Throws
// NumericError if f or any gradient is non-finite.
GradcheckResult gradcheck(const ScalarFunction& f, std::span<const Matrix> inputs,
                          const GradcheckOptions& options = {});

// Evaluates f once and returns the tape gradient for every input.
std::vector<Matrix> tape_gradients(const ScalarFunction& f, std::span<const Matrix> inputs,
                                   double* value = nullptr);

}  // namespace bgnn
