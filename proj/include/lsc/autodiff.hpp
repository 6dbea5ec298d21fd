#pragma once

#include <deque>
#include <functional>
#include <vector>

#include "lsc/tensor.hpp"

namespace lsc {

// Reverse-mode tape. Every differentiable operation appends one node whose
// closure, when run, consumes the node's output gradient and adds the matching
// input gradients into its parents. Nodes are created in topological order, so
// backward() is a single reverse sweep over the tape. Gradients accumulate
// additively; values are never mutated by backward.
class Graph;

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first contribution, same shape as value
  bool requires_grad = false;
  std::function<void()> backward;  // empty for leaves without a gradient sink
};

// Cheap handle into the tape.
class Var {
 public:
  Var() = default;
  explicit Var(Node* n) : node_(n) {}

  bool valid() const { return node_ != nullptr; }
  Node* node() const { return node_; }
  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  const Tensor& grad() const { return node_->grad; }

 private:
  Node* node_ = nullptr;
};

class Graph {
 public:
  Var leaf(Tensor value, bool requires_grad = false);
  // Leaf whose gradient is additionally accumulated into *sink during
  // backward(). The sink must outlive the graph and match the value's shape.
  Var leaf_with_sink(Tensor value, Tensor* sink);

  // Generic node constructor used by the op builders.
  Var make(Tensor value, std::vector<Var> parents,
           std::function<void(Node&, std::vector<Node*>&)> make_backward);

  // Seeds d(loss)/d(loss) = 1 and runs the reverse sweep. loss must be a
  // scalar (numel == 1) node of this graph.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

  static Tensor& ensure_grad(Node& n);

 private:
  std::deque<Node> nodes_;
};

// ---- primitive ops -------------------------------------------------------
// All builders perform shape checks and register the backward closure only
// when a parent requires a gradient.

Var add(Graph& g, Var a, Var b);
Var scale(Graph& g, Var a, double s);
Var mul(Graph& g, Var a, Var b);
Var add_row_broadcast(Graph& g, Var x, Var v);  // (T,d) + (d,)
Var concat(Graph& g, const std::vector<Var>& parts);      // 1-D
Var slice(Graph& g, Var v, std::size_t start, std::size_t len);  // 1-D
Var row(Graph& g, Var x, std::size_t i);                   // (m,n) -> (n,)
Var stack_rows(Graph& g, const std::vector<Var>& rows);    // T x (d,) -> (T,d)
Var transpose(Graph& g, Var x);                            // (m,n) -> (n,m)

Var sigmoid(Graph& g, Var x);
Var tanh_op(Graph& g, Var x);
Var relu(Graph& g, Var x);
Var logc(Graph& g, Var x);  // log(|x| + 1), subgradient 0 at x = 0

Var softmax_vec(Graph& g, Var x);       // 1-D, max-subtracted
Var softmax_rows(Graph& g, Var x);      // 2-D, rowwise
Var log_softmax_vec(Graph& g, Var x);   // 1-D, stable
Var pick(Graph& g, Var v, std::size_t idx);  // 1-D -> scalar
Var sum_all(Graph& g, Var x);                // -> scalar

Var matvec(Graph& g, Var w, Var x);               // (m,n) @ (n,) -> (m,)
Var linear_seq(Graph& g, Var x, Var w, Var b);    // (T,in) @ (out,in)^T (+b) -> (T,out); b may be invalid
Var vecmat(Graph& g, Var a, Var h);               // (T,) @ (T,d) -> (d,)
Var conv1d_same(Graph& g, Var a, Var k);          // (T,), (c,kw) -> (c,T), zero-padded

// Elementwise multiply by a constant mask (augmentation, ablations).
Var mul_const(Graph& g, Var x, Tensor mask);

// Scalar log(|x| + 1) helpers shared by value-level code.
double logc_value(double x);
double logc_derivative(double x);

}  // namespace lsc
