#include "bgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "bgnn/error.hpp"

namespace bgnn {

namespace {

double evaluate(const ScalarFunction& f, std::span<const Matrix> inputs) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Matrix& m : inputs) vars.push_back(tape.constant_view(m));
  const Var out = f(tape, vars);
  const double v = out.value()(0, 0);
  if (!std::isfinite(v)) throw NumericError("gradcheck: function value is not finite");
  return v;
}

}  // namespace

std::vector<Matrix> tape_gradients(const ScalarFunction& f, std::span<const Matrix> inputs,
                                   double* value) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Matrix& m : inputs) vars.push_back(tape.leaf(m, true));
  const Var out = f(tape, vars);
  if (out.rows() != 1 || out.cols() != 1) {
    throw ShapeError("gradcheck: function must return a 1x1 value, got " +
                     out.value().shape_string());
  }
  if (value) *value = out.value()(0, 0);
  tape.backward(out);
  std::vector<Matrix> grads;
  grads.reserve(vars.size());
  for (const Var& v : vars) {
    if (!v.grad().all_finite()) throw NumericError("gradcheck: non-finite tape gradient");
    grads.push_back(v.grad());
  }
  return grads;
}

GradcheckResult gradcheck(const ScalarFunction& f, std::span<const Matrix> inputs,
                          const GradcheckOptions& options) {
  double base = 0.0;
  const std::vector<Matrix> analytic = tape_gradients(f, inputs, &base);
  if (!std::isfinite(base)) throw NumericError("gradcheck: function value is not finite");

  std::vector<Matrix> work(inputs.begin(), inputs.end());
  GradcheckResult result;
  for (std::size_t in = 0; in < work.size(); ++in) {
    auto entries = work[in].data();
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const double saved = entries[k];
      entries[k] = saved + options.eps;
      const double up = evaluate(f, work);
      entries[k] = saved - options.eps;
      const double down = evaluate(f, work);
      entries[k] = saved;

      const double numeric = (up - down) / (2.0 * options.eps);
      const double exact = analytic[in].data()[k];
      const double abs_err = std::abs(exact - numeric);
      const double denom = std::max({std::abs(exact), std::abs(numeric), options.floor});
      const double rel = abs_err / denom;
      result.max_abs_error = std::max(result.max_abs_error, abs_err);
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_input = in;
        result.worst_entry = k;
      }
      ++result.coordinates;
    }
  }
  return result;
}

}  // namespace bgnn
