#pragma once

#include <functional>
#include <string>

#include "lsc/params.hpp"

namespace lsc {

// builder(graph, store) constructs a scalar loss from the store's current
// values. check_gradients runs one analytic backward pass and then central
// finite differences over every coordinate of every parameter in the store.
struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

using LossBuilder = std::function<Var(Graph&, ParameterStore&)>;

GradCheckResult check_gradients(const LossBuilder& builder, ParameterStore& store,
                                double epsilon = 1e-4);

}  // namespace lsc
