#include "lsc/nn.hpp"

#include "lsc/common.hpp"

namespace lsc {

void register_lstm_params(ParameterStore& store, const std::string& name,
                          const LstmSpec& spec, std::uint64_t seed) {
  std::size_t in = spec.input + spec.hidden;
  store.create(name + ".W", {4 * spec.hidden, in}, in, seed);
  store.create_zeros(name + ".b", {4 * spec.hidden});
}

LstmState lstm_zero_state(Graph& g, std::size_t hidden) {
  return {g.leaf(Tensor({hidden})), g.leaf(Tensor({hidden}))};
}

LstmState lstm_step(Graph& g, Var x, const LstmState& prev, Var w, Var b) {
  std::size_t hidden = prev.h.value().numel();
  if (w.value().rank() != 2 || w.value().dim(0) != 4 * hidden ||
      w.value().dim(1) != x.value().numel() + hidden) {
    throw DimensionError("lstm_step: weight " + shape_str(w.shape()) +
                         " does not match input " + shape_str(x.shape()) +
                         " and hidden " + shape_str(prev.h.shape()));
  }
  Var xin = concat(g, {x, prev.h});
  Var z = add(g, matvec(g, w, xin), b);
  Var i = sigmoid(g, slice(g, z, 0, hidden));
  Var f = sigmoid(g, slice(g, z, hidden, hidden));
  Var c_tilde = tanh_op(g, slice(g, z, 2 * hidden, hidden));
  Var o = sigmoid(g, slice(g, z, 3 * hidden, hidden));
  Var c = add(g, mul(g, f, prev.c), mul(g, i, c_tilde));
  Var h = mul(g, o, tanh_op(g, c));
  return {h, c};
}

LstmState lstm_step(Graph& g, ParameterStore& store, const std::string& name,
                    Var x, const LstmState& prev) {
  return lstm_step(g, x, prev, store.use(g, name + ".W"), store.use(g, name + ".b"));
}

void register_encoder_params(ParameterStore& store, const EncoderConfig& cfg,
                             std::size_t input_dim, std::uint64_t seed) {
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    std::string base = "encoder.l" + std::to_string(l);
    register_lstm_params(store, base + ".fwd", {in, cfg.hidden}, seed);
    register_lstm_params(store, base + ".bwd", {in, cfg.hidden}, seed);
    store.create(base + ".proj.W", {cfg.projection, 2 * cfg.hidden}, 2 * cfg.hidden, seed);
    store.create_zeros(base + ".proj.b", {cfg.projection});
    in = cfg.projection;
  }
}

std::size_t encoder_param_count(const EncoderConfig& cfg, std::size_t input_dim) {
  std::size_t total = 0;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    std::size_t cell = 4 * cfg.hidden * (in + cfg.hidden) + 4 * cfg.hidden;
    total += 2 * cell;  // both directions
    total += cfg.projection * 2 * cfg.hidden + cfg.projection;
    in = cfg.projection;
  }
  return total;
}

Var blstmp_encode(Graph& g, Var features, ParameterStore& store,
                  const EncoderConfig& cfg) {
  const Tensor& fv = features.value();
  if (fv.rank() != 2) throw DimensionError("encoder expects (T, C) features");
  std::size_t t = fv.dim(0);
  if (t == 0) throw DataError("encoder: empty sequence");

  Var x = features;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    std::string base = "encoder.l" + std::to_string(l);
    Var w_f = store.use(g, base + ".fwd.W");
    Var b_f = store.use(g, base + ".fwd.b");
    Var w_b = store.use(g, base + ".bwd.W");
    Var b_b = store.use(g, base + ".bwd.b");

    std::vector<Var> fwd(t), bwd(t);
    LstmState st = lstm_zero_state(g, cfg.hidden);
    for (std::size_t i = 0; i < t; ++i) {
      st = lstm_step(g, row(g, x, i), st, w_f, b_f);
      fwd[i] = st.h;
    }
    st = lstm_zero_state(g, cfg.hidden);
    for (std::size_t i = t; i-- > 0;) {
      st = lstm_step(g, row(g, x, i), st, w_b, b_b);
      bwd[i] = st.h;
    }
    std::vector<Var> both(t);
    for (std::size_t i = 0; i < t; ++i) both[i] = concat(g, {fwd[i], bwd[i]});
    Var stacked = stack_rows(g, both);
    x = linear_seq(g, stacked, store.use(g, base + ".proj.W"),
                   store.use(g, base + ".proj.b"));
  }
  return x;
}

}  // namespace lsc
