#pragma once

#include <string>
#include <vector>

#include "lsc/attention.hpp"
#include "lsc/audio.hpp"
#include "lsc/augment.hpp"
#include "lsc/ctc.hpp"
#include "lsc/frontend.hpp"
#include "lsc/nn.hpp"

namespace lsc {

// Character tokenizer. Index 0 is the CTC blank and doubles as the attention
// start/end symbol; alphabet characters map to 1..V.
struct Tokenizer {
  std::string alphabet;

  std::size_t vocab() const { return alphabet.size(); }
  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& tokens) const;
};

struct ModelConfig {
  int sample_rate_hz = 16000;
  double frame_ms = 25.0;
  double shift_ms = 10.0;
  FrontEndConfig frontend;
  EncoderConfig encoder;
  DecoderConfig decoder;
  std::string alphabet;

  std::size_t frame_samples() const;
};

// The full network: front-end, encoder, CTC head and attention decoder over a
// shared parameter store.
class Model {
 public:
  Model(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const Tokenizer& tokenizer() const { return tok_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  std::uint64_t seed() const { return seed_; }

  FrameMatrix frame(const AudioBuffer& audio) const;

  // Tape builders.
  Var features(Graph& g, const FrameMatrix& frames);
  Var encode(Graph& g, Var feats);
  Var ctc_logits(Graph& g, Var enc);  // (T, V+1)

  struct Losses {
    Var joint;
    double att = 0.0;
    double ctc = 0.0;
  };
  // Teacher-forced joint loss; the plan (if any) augments the features.
  Losses utterance_loss(Graph& g, const FrameMatrix& frames, const std::vector<int>& target,
                        double lambda, const AugmentPlan* plan = nullptr);

  // Value-level passes used at evaluation/decode time.
  Tensor ctc_posteriors(const FrameMatrix& frames);  // (T, V+1)
  FeatureSequence extract(const FrameMatrix& frames);

  std::size_t frontend_param_count() const;
  std::size_t backend_param_count() const;

 private:
  ModelConfig cfg_;
  Tokenizer tok_;
  ParameterStore store_;
  std::uint64_t seed_;
};

}  // namespace lsc
