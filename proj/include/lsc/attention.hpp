#pragma once

#include <string>
#include <vector>

#include "lsc/nn.hpp"
#include "lsc/params.hpp"

namespace lsc {

// Location-aware attention: the score of encoder state h_t combines the
// previous decoder state, h_t itself and a convolution of the previous
// attention distribution, each through its own linear map, squashed by tanh
// and projected onto a learned vector.
struct AttentionConfig {
  std::size_t dim = 64;          // d_att
  std::size_t loc_kernel = 15;   // odd
  std::size_t loc_channels = 8;
  double sharpness = 1.0;        // scores are multiplied by this before softmax
};

struct DecoderConfig {
  std::size_t hidden = 96;
  std::size_t layers = 1;  // stacked cells
  std::size_t embed_dim = 32;
  AttentionConfig attention;
};

// Output distribution covers EOS (index 0, shared with the start symbol in
// the embedding table) plus tokens 1..V.
void register_decoder_params(ParameterStore& store, const DecoderConfig& cfg,
                             std::size_t enc_dim, std::size_t vocab,
                             std::uint64_t seed);
std::size_t decoder_param_count(const DecoderConfig& cfg, std::size_t enc_dim,
                                std::size_t vocab);

struct AttendResult {
  Var weights;  // (T,), sums to 1
  Var context;  // (enc_dim,)
};

// One attention read over H given the previous decoder state and previous
// attention weights.
AttendResult attend(Graph& g, Var enc_states, Var query, Var prev_weights,
                    ParameterStore& store, const AttentionConfig& cfg);

struct DecoderState {
  std::vector<LstmState> cells;  // one per stacked layer
  Var prev_weights;              // (T,)
  int prev_token = 0;            // start symbol before the first step
};

DecoderState decoder_initial_state(Graph& g, const DecoderConfig& cfg, std::size_t t_len);

struct DecoderStepResult {
  Var log_probs;  // (V+1,), log p over EOS + tokens
  DecoderState state;
  Var weights;  // attention weights used this step
};

// Embeds the previous token, attends, advances the stacked cells and maps the
// top hidden state to output log probabilities.
DecoderStepResult decoder_step(Graph& g, Var enc_states, const DecoderState& state,
                               ParameterStore& store, const DecoderConfig& cfg,
                               std::size_t vocab);

// Teacher-forced cross entropy over target plus the end-of-sequence step.
Var attention_loss(Graph& g, Var enc_states, const std::vector<int>& target,
                   ParameterStore& store, const DecoderConfig& cfg, std::size_t vocab);

// (1 - lambda) * attention + lambda * ctc.
Var joint_loss(Graph& g, Var att_loss, Var ctc_loss_term, double lambda);
double joint_loss_value(double att, double ctc, double lambda);

}  // namespace lsc
