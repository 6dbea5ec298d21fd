#include "lsc/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "lsc/common.hpp"

namespace lsc {

Var Graph::leaf(Tensor value, bool requires_grad) {
  nodes_.emplace_back();
  Node& n = nodes_.back();
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return Var(&n);
}

Var Graph::leaf_with_sink(Tensor value, Tensor* sink) {
  nodes_.emplace_back();
  Node& n = nodes_.back();
  n.value = std::move(value);
  n.requires_grad = true;
  Node* np = &n;
  n.backward = [np, sink]() {
    if (!np->grad.empty()) sink->axpy(1.0, np->grad);
  };
  return Var(&n);
}

Tensor& Graph::ensure_grad(Node& n) {
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.shape());
  return n.grad;
}

Var Graph::make(Tensor value, std::vector<Var> parents,
                std::function<void(Node&, std::vector<Node*>&)> make_backward) {
  nodes_.emplace_back();
  Node& n = nodes_.back();
  n.value = std::move(value);
  bool needs = false;
  for (const Var& p : parents) needs = needs || p.requires_grad();
  n.requires_grad = needs;
  if (needs && make_backward) {
    auto pp = std::make_shared<std::vector<Node*>>();
    pp->reserve(parents.size());
    for (const Var& p : parents) pp->push_back(p.node());
    Node* np = &n;
    auto mk = std::move(make_backward);
    n.backward = [np, pp, mk]() {
      if (!np->grad.empty()) mk(*np, *pp);
    };
  }
  return Var(&n);
}

void Graph::backward(Var loss) {
  if (!loss.valid() || loss.value().numel() != 1) {
    throw DimensionError("backward requires a scalar loss node");
  }
  ensure_grad(*loss.node())[0] += 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    if (it->backward) it->backward();
  }
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a.value().same_shape(b.value())) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

Var unary_elementwise(Graph& g, Var x, double (*f)(double), double (*df)(double)) {
  Tensor out(x.shape());
  const Tensor& xv = x.value();
  for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = f(xv[i]);
  return g.make(std::move(out), {x}, [df](Node& n, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    const Tensor& xv = ps[0]->value;
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += n.grad[i] * df(xv[i]);
  });
}

}  // namespace

Var add(Graph& g, Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  out.axpy(1.0, b.value());
  return g.make(std::move(out), {a, b}, [](Node& n, std::vector<Node*>& ps) {
    Graph::ensure_grad(*ps[0]).axpy(1.0, n.grad);
    Graph::ensure_grad(*ps[1]).axpy(1.0, n.grad);
  });
}

Var scale(Graph& g, Var a, double s) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = s * a.value()[i];
  return g.make(std::move(out), {a}, [s](Node& n, std::vector<Node*>& ps) {
    Graph::ensure_grad(*ps[0]).axpy(s, n.grad);
  });
}

Var mul(Graph& g, Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = a.value()[i] * b.value()[i];
  return g.make(std::move(out), {a, b}, [](Node& n, std::vector<Node*>& ps) {
    Tensor& ga = Graph::ensure_grad(*ps[0]);
    Tensor& gb = Graph::ensure_grad(*ps[1]);
    const Tensor& av = ps[0]->value;
    const Tensor& bv = ps[1]->value;
    for (std::size_t i = 0; i < ga.numel(); ++i) {
      ga[i] += n.grad[i] * bv[i];
      gb[i] += n.grad[i] * av[i];
    }
  });
}

Var add_row_broadcast(Graph& g, Var x, Var v) {
  if (x.value().rank() != 2 || v.value().rank() != 1 ||
      x.value().dim(1) != v.value().dim(0)) {
    throw DimensionError("add_row_broadcast: " + shape_str(x.shape()) + " vs " +
                         shape_str(v.shape()));
  }
  std::size_t t = x.value().dim(0), d = x.value().dim(1);
  Tensor out = x.value();
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) += v.value()[j];
  return g.make(std::move(out), {x, v}, [t, d](Node& n, std::vector<Node*>& ps) {
    Graph::ensure_grad(*ps[0]).axpy(1.0, n.grad);
    Tensor& gv = Graph::ensure_grad(*ps[1]);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < d; ++j) gv[j] += n.grad.at(i, j);
  });
}

Var concat(Graph& g, const std::vector<Var>& parts) {
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rank() != 1) throw DimensionError("concat expects 1-D parts");
    total += p.value().numel();
  }
  Tensor out({total});
  std::size_t off = 0;
  for (const Var& p : parts) {
    for (std::size_t i = 0; i < p.value().numel(); ++i) out[off + i] = p.value()[i];
    off += p.value().numel();
  }
  return g.make(std::move(out), parts, [](Node& n, std::vector<Node*>& ps) {
    std::size_t off = 0;
    for (Node* p : ps) {
      Tensor& gp = Graph::ensure_grad(*p);
      for (std::size_t i = 0; i < gp.numel(); ++i) gp[i] += n.grad[off + i];
      off += gp.numel();
    }
  });
}

Var slice(Graph& g, Var v, std::size_t start, std::size_t len) {
  if (v.value().rank() != 1 || start + len > v.value().numel()) {
    throw DimensionError("slice out of range");
  }
  Tensor out({len});
  for (std::size_t i = 0; i < len; ++i) out[i] = v.value()[start + i];
  return g.make(std::move(out), {v}, [start, len](Node& n, std::vector<Node*>& ps) {
    Tensor& gv = Graph::ensure_grad(*ps[0]);
    for (std::size_t i = 0; i < len; ++i) gv[start + i] += n.grad[i];
  });
}

Var row(Graph& g, Var x, std::size_t i) {
  if (x.value().rank() != 2 || i >= x.value().dim(0)) {
    throw DimensionError("row index out of range");
  }
  std::size_t d = x.value().dim(1);
  Tensor out({d});
  for (std::size_t j = 0; j < d; ++j) out[j] = x.value().at(i, j);
  return g.make(std::move(out), {x}, [i, d](Node& n, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    for (std::size_t j = 0; j < d; ++j) gx.at(i, j) += n.grad[j];
  });
}

Var stack_rows(Graph& g, const std::vector<Var>& rows) {
  if (rows.empty()) throw DimensionError("stack_rows on empty list");
  std::size_t d = rows[0].value().numel();
  for (const Var& r : rows) {
    if (r.value().rank() != 1 || r.value().numel() != d) {
      throw DimensionError("stack_rows expects equal-length 1-D rows");
    }
  }
  Tensor out({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = rows[i].value()[j];
  return g.make(std::move(out), rows, [d](Node& n, std::vector<Node*>& ps) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      Tensor& gr = Graph::ensure_grad(*ps[i]);
      for (std::size_t j = 0; j < d; ++j) gr[j] += n.grad.at(i, j);
    }
  });
}

Var transpose(Graph& g, Var x) {
  if (x.value().rank() != 2) throw DimensionError("transpose expects rank 2");
  std::size_t m = x.value().dim(0), n2 = x.value().dim(1);
  Tensor out({n2, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n2; ++j) out.at(j, i) = x.value().at(i, j);
  return g.make(std::move(out), {x}, [m, n2](Node& n, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n2; ++j) gx.at(i, j) += n.grad.at(j, i);
  });
}

namespace detail {
double sigmoid_f(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double sigmoid_df(double x) {
  double s = sigmoid_f(x);
  return s * (1.0 - s);
}
double tanh_f(double x) { return std::tanh(x); }
double tanh_df(double x) {
  double t = std::tanh(x);
  return 1.0 - t * t;
}
double relu_f(double x) { return x > 0.0 ? x : 0.0; }
double relu_df(double x) { return x > 0.0 ? 1.0 : 0.0; }
}  // namespace detail

double logc_value(double x) { return std::log(std::fabs(x) + 1.0); }

double logc_derivative(double x) {
  if (x == 0.0) return 0.0;
  return (x > 0.0 ? 1.0 : -1.0) / (std::fabs(x) + 1.0);
}

Var sigmoid(Graph& g, Var x) {
  return unary_elementwise(g, x, detail::sigmoid_f, detail::sigmoid_df);
}
Var tanh_op(Graph& g, Var x) {
  return unary_elementwise(g, x, detail::tanh_f, detail::tanh_df);
}
Var relu(Graph& g, Var x) {
  return unary_elementwise(g, x, detail::relu_f, detail::relu_df);
}
Var logc(Graph& g, Var x) {
  return unary_elementwise(g, x, logc_value, logc_derivative);
}

namespace {

// Stable softmax over data[off .. off+n); writes into out.
void softmax_span(const double* in, double* out, std::size_t n) {
  double m = in[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, in[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(in[i] - m);
    z += out[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

// dL/dx_i = y_i * (g_i - sum_j g_j y_j)
void softmax_backward_span(const double* y, const double* gy, double* gx, std::size_t n) {
  double dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += gy[i] * y[i];
  for (std::size_t i = 0; i < n; ++i) gx[i] += y[i] * (gy[i] - dot);
}

}  // namespace

Var softmax_vec(Graph& g, Var x) {
  if (x.value().rank() != 1) throw DimensionError("softmax_vec expects rank 1");
  std::size_t n = x.value().numel();
  Tensor out({n});
  softmax_span(x.value().data(), out.data(), n);
  return g.make(std::move(out), {x}, [n](Node& nd, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    softmax_backward_span(nd.value.data(), nd.grad.data(), gx.data(), n);
  });
}

Var softmax_rows(Graph& g, Var x) {
  if (x.value().rank() != 2) throw DimensionError("softmax_rows expects rank 2");
  std::size_t t = x.value().dim(0), n = x.value().dim(1);
  Tensor out({t, n});
  for (std::size_t i = 0; i < t; ++i)
    softmax_span(x.value().data() + i * n, out.data() + i * n, n);
  return g.make(std::move(out), {x}, [t, n](Node& nd, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    for (std::size_t i = 0; i < t; ++i)
      softmax_backward_span(nd.value.data() + i * n, nd.grad.data() + i * n,
                            gx.data() + i * n, n);
  });
}

Var log_softmax_vec(Graph& g, Var x) {
  if (x.value().rank() != 1) throw DimensionError("log_softmax_vec expects rank 1");
  std::size_t n = x.value().numel();
  const Tensor& xv = x.value();
  double m = xv[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, xv[i]);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += std::exp(xv[i] - m);
  double logz = m + std::log(z);
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) out[i] = xv[i] - logz;
  return g.make(std::move(out), {x}, [n](Node& nd, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    double gsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) gsum += nd.grad[i];
    for (std::size_t i = 0; i < n; ++i)
      gx[i] += nd.grad[i] - std::exp(nd.value[i]) * gsum;
  });
}

Var pick(Graph& g, Var v, std::size_t idx) {
  if (v.value().rank() != 1 || idx >= v.value().numel()) {
    throw DimensionError("pick index out of range");
  }
  return g.make(Tensor::scalar(v.value()[idx]), {v},
                [idx](Node& n, std::vector<Node*>& ps) {
                  Graph::ensure_grad(*ps[0])[idx] += n.grad[0];
                });
}

Var sum_all(Graph& g, Var x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.value().numel(); ++i) s += x.value()[i];
  return g.make(Tensor::scalar(s), {x}, [](Node& n, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += n.grad[0];
  });
}

Var matvec(Graph& g, Var w, Var x) {
  if (w.value().rank() != 2 || x.value().rank() != 1 ||
      w.value().dim(1) != x.value().dim(0)) {
    throw DimensionError("matvec: " + shape_str(w.shape()) + " @ " +
                         shape_str(x.shape()));
  }
  std::size_t m = w.value().dim(0), n = w.value().dim(1);
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    const double* wr = w.value().data() + i * n;
    for (std::size_t j = 0; j < n; ++j) s += wr[j] * x.value()[j];
    out[i] = s;
  }
  return g.make(std::move(out), {w, x}, [m, n](Node& nd, std::vector<Node*>& ps) {
    Tensor& gw = Graph::ensure_grad(*ps[0]);
    Tensor& gx = Graph::ensure_grad(*ps[1]);
    const Tensor& wv = ps[0]->value;
    const Tensor& xv = ps[1]->value;
    for (std::size_t i = 0; i < m; ++i) {
      double gi = nd.grad[i];
      if (gi == 0.0) continue;
      double* gwr = gw.data() + i * n;
      const double* wr = wv.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) {
        gwr[j] += gi * xv[j];
        gx[j] += gi * wr[j];
      }
    }
  });
}

Var linear_seq(Graph& g, Var x, Var w, Var b) {
  if (x.value().rank() != 2 || w.value().rank() != 2 ||
      x.value().dim(1) != w.value().dim(1)) {
    throw DimensionError("linear_seq: " + shape_str(x.shape()) + " @ " +
                         shape_str(w.shape()) + "^T");
  }
  std::size_t t = x.value().dim(0), in = x.value().dim(1), out_d = w.value().dim(0);
  if (b.valid() && (b.value().rank() != 1 || b.value().dim(0) != out_d)) {
    throw DimensionError("linear_seq bias shape " + shape_str(b.shape()));
  }
  Tensor out({t, out_d});
  for (std::size_t i = 0; i < t; ++i) {
    const double* xr = x.value().data() + i * in;
    for (std::size_t o = 0; o < out_d; ++o) {
      const double* wr = w.value().data() + o * in;
      double s = b.valid() ? b.value()[o] : 0.0;
      for (std::size_t j = 0; j < in; ++j) s += xr[j] * wr[j];
      out.at(i, o) = s;
    }
  }
  std::vector<Var> parents = {x, w};
  if (b.valid()) parents.push_back(b);
  return g.make(std::move(out), parents,
                [t, in, out_d](Node& nd, std::vector<Node*>& ps) {
                  Tensor& gx = Graph::ensure_grad(*ps[0]);
                  Tensor& gw = Graph::ensure_grad(*ps[1]);
                  Tensor* gb = ps.size() > 2 ? &Graph::ensure_grad(*ps[2]) : nullptr;
                  const Tensor& xv = ps[0]->value;
                  const Tensor& wv = ps[1]->value;
                  for (std::size_t i = 0; i < t; ++i) {
                    const double* xr = xv.data() + i * in;
                    double* gxr = gx.data() + i * in;
                    for (std::size_t o = 0; o < out_d; ++o) {
                      double go = nd.grad.at(i, o);
                      if (go == 0.0) continue;
                      const double* wr = wv.data() + o * in;
                      double* gwr = gw.data() + o * in;
                      for (std::size_t j = 0; j < in; ++j) {
                        gxr[j] += go * wr[j];
                        gwr[j] += go * xr[j];
                      }
                      if (gb) (*gb)[o] += go;
                    }
                  }
                });
}

Var vecmat(Graph& g, Var a, Var h) {
  if (a.value().rank() != 1 || h.value().rank() != 2 ||
      a.value().dim(0) != h.value().dim(0)) {
    throw DimensionError("vecmat: " + shape_str(a.shape()) + " @ " +
                         shape_str(h.shape()));
  }
  std::size_t t = h.value().dim(0), d = h.value().dim(1);
  Tensor out({d});
  for (std::size_t i = 0; i < t; ++i) {
    double ai = a.value()[i];
    const double* hr = h.value().data() + i * d;
    for (std::size_t j = 0; j < d; ++j) out[j] += ai * hr[j];
  }
  return g.make(std::move(out), {a, h}, [t, d](Node& nd, std::vector<Node*>& ps) {
    Tensor& ga = Graph::ensure_grad(*ps[0]);
    Tensor& gh = Graph::ensure_grad(*ps[1]);
    const Tensor& av = ps[0]->value;
    const Tensor& hv = ps[1]->value;
    for (std::size_t i = 0; i < t; ++i) {
      const double* hr = hv.data() + i * d;
      double* ghr = gh.data() + i * d;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        s += nd.grad[j] * hr[j];
        ghr[j] += av[i] * nd.grad[j];
      }
      ga[i] += s;
    }
  });
}

Var conv1d_same(Graph& g, Var a, Var k) {
  if (a.value().rank() != 1 || k.value().rank() != 2) {
    throw DimensionError("conv1d_same: " + shape_str(a.shape()) + ", " +
                         shape_str(k.shape()));
  }
  std::size_t t = a.value().dim(0), c = k.value().dim(0), kw = k.value().dim(1);
  std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kw - 1) / 2;
  Tensor out({c, t});
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* kr = k.value().data() + ch * kw;
    for (std::size_t i = 0; i < t; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < kw; ++j) {
        std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(j) - half;
        if (src >= 0 && src < static_cast<std::ptrdiff_t>(t)) s += kr[j] * a.value()[src];
      }
      out.at(ch, i) = s;
    }
  }
  return g.make(std::move(out), {a, k},
                [t, c, kw, half](Node& nd, std::vector<Node*>& ps) {
                  Tensor& ga = Graph::ensure_grad(*ps[0]);
                  Tensor& gk = Graph::ensure_grad(*ps[1]);
                  const Tensor& av = ps[0]->value;
                  const Tensor& kv = ps[1]->value;
                  for (std::size_t ch = 0; ch < c; ++ch) {
                    const double* kr = kv.data() + ch * kw;
                    double* gkr = gk.data() + ch * kw;
                    for (std::size_t i = 0; i < t; ++i) {
                      double go = nd.grad.at(ch, i);
                      if (go == 0.0) continue;
                      for (std::size_t j = 0; j < kw; ++j) {
                        std::ptrdiff_t src = static_cast<std::ptrdiff_t>(i) +
                                             static_cast<std::ptrdiff_t>(j) - half;
                        if (src >= 0 && src < static_cast<std::ptrdiff_t>(t)) {
                          ga[src] += go * kr[j];
                          gkr[j] += go * av[src];
                        }
                      }
                    }
                  }
                });
}

Var mul_const(Graph& g, Var x, Tensor mask) {
  if (!x.value().same_shape(mask)) {
    throw DimensionError("mul_const: shape mismatch " + shape_str(x.shape()) +
                         " vs " + shape_str(mask.shape()));
  }
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x.value()[i] * mask[i];
  auto m = std::make_shared<Tensor>(std::move(mask));
  return g.make(std::move(out), {x}, [m](Node& n, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx[i] += n.grad[i] * (*m)[i];
  });
}

}  // namespace lsc
