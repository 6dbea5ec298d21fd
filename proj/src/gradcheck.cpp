#include "lsc/gradcheck.hpp"

#include <cmath>

#include "lsc/common.hpp"

namespace lsc {

namespace {

double eval(const LossBuilder& builder, ParameterStore& store) {
  Graph g;
  Var loss = builder(g, store);
  if (loss.value().numel() != 1) throw DimensionError("loss must be scalar");
  double v = loss.value()[0];
  if (!std::isfinite(v)) throw NumericError("non-finite loss in gradient check");
  return v;
}

}  // namespace

GradCheckResult check_gradients(const LossBuilder& builder, ParameterStore& store,
                                double epsilon) {
  store.zero_grad();
  {
    Graph g;
    Var loss = builder(g, store);
    if (loss.value().numel() != 1) throw DimensionError("loss must be scalar");
    if (!std::isfinite(loss.value()[0]))
      throw NumericError("non-finite loss in gradient check");
    g.backward(loss);
  }

  GradCheckResult result;
  for (const auto& name : store.names()) {
    Tensor& value = store.value(name);
    const Tensor& analytic = store.grad(name);
    for (std::size_t i = 0; i < value.numel(); ++i) {
      double saved = value[i];
      value[i] = saved + epsilon;
      double up = eval(builder, store);
      value[i] = saved - epsilon;
      double down = eval(builder, store);
      value[i] = saved;
      double numeric = (up - down) / (2.0 * epsilon);
      if (!std::isfinite(numeric)) {
        throw NumericError("non-finite finite difference at " + name + "[" +
                           std::to_string(i) + "]");
      }
      double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-8});
      double rel = std::fabs(analytic[i] - numeric) / denom;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_param = name;
        result.worst_index = i;
        result.analytic = analytic[i];
        result.numeric = numeric;
      }
    }
  }
  store.zero_grad();
  return result;
}

}  // namespace lsc
