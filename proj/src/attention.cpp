#include "lsc/attention.hpp"

#include "lsc/common.hpp"

namespace lsc {

void register_decoder_params(ParameterStore& store, const DecoderConfig& cfg,
                             std::size_t enc_dim, std::size_t vocab,
                             std::uint64_t seed) {
  const AttentionConfig& att = cfg.attention;
  if (att.loc_kernel % 2 == 0) throw ConfigError("attention loc_kernel must be odd");
  store.create("att.q.W", {att.dim, cfg.hidden}, cfg.hidden, seed);
  store.create("att.h.W", {att.dim, enc_dim}, enc_dim, seed);
  store.create("att.loc.W", {att.dim, att.loc_channels}, att.loc_channels, seed);
  store.create("att.loc.K", {att.loc_channels, att.loc_kernel}, att.loc_kernel, seed);
  store.create("att.g", {att.dim}, att.dim, seed);

  store.create("decoder.embed", {vocab + 1, cfg.embed_dim}, cfg.embed_dim, seed);
  std::size_t in = enc_dim + cfg.embed_dim;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    register_lstm_params(store, "decoder.lstm" + std::to_string(l), {in, cfg.hidden}, seed);
    in = cfg.hidden;
  }
  store.create("decoder.out.W", {vocab + 1, cfg.hidden}, cfg.hidden, seed);
  store.create_zeros("decoder.out.b", {vocab + 1});
}

std::size_t decoder_param_count(const DecoderConfig& cfg, std::size_t enc_dim,
                                std::size_t vocab) {
  const AttentionConfig& att = cfg.attention;
  std::size_t total = att.dim * cfg.hidden + att.dim * enc_dim +
                      att.dim * att.loc_channels + att.loc_channels * att.loc_kernel +
                      att.dim;
  total += (vocab + 1) * cfg.embed_dim;
  std::size_t in = enc_dim + cfg.embed_dim;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    total += 4 * cfg.hidden * (in + cfg.hidden) + 4 * cfg.hidden;
    in = cfg.hidden;
  }
  total += (vocab + 1) * cfg.hidden + (vocab + 1);
  return total;
}

AttendResult attend(Graph& g, Var enc_states, Var query, Var prev_weights,
                    ParameterStore& store, const AttentionConfig& cfg) {
  const Tensor& h = enc_states.value();
  if (h.rank() != 2 || h.dim(0) == 0) throw DimensionError("attend expects (T, d_enc)");

  // Location feature: convolve the previous attention over time, keeping T.
  Var loc = conv1d_same(g, prev_weights, store.use(g, "att.loc.K"));  // (c_loc, T)
  Var loc_proj = linear_seq(g, transpose(g, loc), store.use(g, "att.loc.W"), Var());

  Var h_proj = linear_seq(g, enc_states, store.use(g, "att.h.W"), Var());
  Var q_proj = matvec(g, store.use(g, "att.q.W"), query);
  Var summed = add(g, add_row_broadcast(g, h_proj, q_proj), loc_proj);
  Var scores = matvec(g, tanh_op(g, summed), store.use(g, "att.g"));  // (T,)
  if (cfg.sharpness != 1.0) scores = scale(g, scores, cfg.sharpness);
  Var weights = softmax_vec(g, scores);
  Var context = vecmat(g, weights, enc_states);
  return {weights, context};
}

DecoderState decoder_initial_state(Graph& g, const DecoderConfig& cfg, std::size_t t_len) {
  DecoderState st;
  for (std::size_t l = 0; l < cfg.layers; ++l)
    st.cells.push_back(lstm_zero_state(g, cfg.hidden));
  Tensor uniform({t_len});
  uniform.fill(1.0 / static_cast<double>(t_len));
  st.prev_weights = g.leaf(std::move(uniform));
  st.prev_token = 0;
  return st;
}

DecoderStepResult decoder_step(Graph& g, Var enc_states, const DecoderState& state,
                               ParameterStore& store, const DecoderConfig& cfg,
                               std::size_t vocab) {
  if (state.prev_token < 0 || state.prev_token > static_cast<int>(vocab)) {
    throw DataError("decoder_step: token " + std::to_string(state.prev_token) +
                    " outside 0.." + std::to_string(vocab));
  }
  Var query = state.cells.back().h;
  AttendResult att = attend(g, enc_states, query, state.prev_weights, store, cfg.attention);

  Var emb = row(g, store.use(g, "decoder.embed"),
                static_cast<std::size_t>(state.prev_token));
  Var x = concat(g, {att.context, emb});

  DecoderState next = state;
  next.prev_weights = att.weights;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    next.cells[l] = lstm_step(g, store, "decoder.lstm" + std::to_string(l), x,
                              state.cells[l]);
    x = next.cells[l].h;
  }
  Var logits = add(g, matvec(g, store.use(g, "decoder.out.W"), x),
                   store.use(g, "decoder.out.b"));
  return {log_softmax_vec(g, logits), next, att.weights};
}

Var attention_loss(Graph& g, Var enc_states, const std::vector<int>& target,
                   ParameterStore& store, const DecoderConfig& cfg, std::size_t vocab) {
  if (target.empty()) throw DataError("attention_loss: empty target");
  DecoderState state = decoder_initial_state(g, cfg, enc_states.value().dim(0));
  Var total;
  for (std::size_t l = 0; l <= target.size(); ++l) {
    DecoderStepResult step = decoder_step(g, enc_states, state, store, cfg, vocab);
    int want = l < target.size() ? target[l] : 0;  // final step predicts EOS
    if (want < 0 || want > static_cast<int>(vocab)) {
      throw DataError("attention_loss: target token " + std::to_string(want) +
                      " outside vocabulary");
    }
    Var nll = scale(g, pick(g, step.log_probs, static_cast<std::size_t>(want)), -1.0);
    total = total.valid() ? add(g, total, nll) : nll;
    state = step.state;
    state.prev_token = want;  // teacher forcing
  }
  return total;
}

Var joint_loss(Graph& g, Var att_loss, Var ctc_loss_term, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  return add(g, scale(g, att_loss, 1.0 - lambda), scale(g, ctc_loss_term, lambda));
}

double joint_loss_value(double att, double ctc, double lambda) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw ConfigError("lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  return (1.0 - lambda) * att + lambda * ctc;
}

}  // namespace lsc
