#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsc/autodiff.hpp"
#include "lsc/tensor.hpp"

namespace lsc {

// Named collection of trainable tensors with matching gradient accumulators.
// Gradients accumulate additively across backward passes until zero_grad().
class ParameterStore {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
  };

  // Creates the parameter if absent, initialized uniformly in
  // [-1/sqrt(fan_in), +1/sqrt(fan_in)] with a stream keyed by (seed, name),
  // so the result does not depend on registration order.
  Tensor& create(const std::string& name, Shape shape, std::size_t fan_in,
                 std::uint64_t seed);
  Tensor& create_zeros(const std::string& name, Shape shape);

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);

  // Tape leaf bound to this parameter; backward adds into its grad slot.
  Var use(Graph& g, const std::string& name);

  void zero_grad();
  // value <- value - lr * (velocity if momentum > 0 else grad); grads zeroed.
  void sgd_step(double lr, double momentum = 0.0);

  double grad_norm() const;
  void clip_grad_norm(double max_norm);

  std::size_t total_count() const;
  std::vector<std::string> names() const;
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;
  std::map<std::string, Tensor> velocity_;
};

// Versioned JSON snapshot of all parameters plus a config echo and RNG seed.
// save -> load -> save is byte identical.
void save_checkpoint(const ParameterStore& store, const std::string& config_json,
                     std::uint64_t seed, const std::string& path);

struct Checkpoint {
  int format_version = 0;
  std::uint64_t seed = 0;
  std::string config_json;
  std::map<std::string, Tensor> params;
};

Checkpoint load_checkpoint(const std::string& path);

// Replaces store values by the checkpoint's; shapes must match, names must
// cover the store exactly.
void restore_params(ParameterStore& store, const Checkpoint& ckpt);

}  // namespace lsc
