#pragma once

#include <string>
#include <vector>

#include "lsc/params.hpp"

namespace lsc {

// Stacked-LSTM sizing used by the encoder and the attention decoder.
struct LstmSpec {
  std::size_t input = 0;
  std::size_t hidden = 0;
};

// Registers W (4H, in+H) and b (4H,) under "<name>.W" / "<name>.b".
// Gate order within the 4H rows is input, forget, cell, output.
void register_lstm_params(ParameterStore& store, const std::string& name,
                          const LstmSpec& spec, std::uint64_t seed);

struct LstmState {
  Var h;
  Var c;
};

LstmState lstm_zero_state(Graph& g, std::size_t hidden);

// One cell update: gates from the affine map of [x, h], then
// c' = f.c + i.g~ and h' = o.tanh(c').
LstmState lstm_step(Graph& g, Var x, const LstmState& prev, Var w, Var b);

// Named-parameter convenience over lstm_step.
LstmState lstm_step(Graph& g, ParameterStore& store, const std::string& name,
                    Var x, const LstmState& prev);

struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t hidden = 96;      // per direction
  std::size_t projection = 96;  // output dim of each layer
};

void register_encoder_params(ParameterStore& store, const EncoderConfig& cfg,
                             std::size_t input_dim, std::uint64_t seed);
std::size_t encoder_param_count(const EncoderConfig& cfg, std::size_t input_dim);

// Bidirectional LSTM with a linear projection per layer: each layer runs the
// sequence left-to-right and right-to-left, concatenates per step and
// projects back down. features (T, C) -> (T, projection).
Var blstmp_encode(Graph& g, Var features, ParameterStore& store,
                  const EncoderConfig& cfg);

}  // namespace lsc
