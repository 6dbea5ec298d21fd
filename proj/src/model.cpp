#include "lsc/model.hpp"

#include <cmath>

#include "lsc/common.hpp"

namespace lsc {

std::vector<int> Tokenizer::encode(const std::string& text) const {
  std::vector<int> out;
  out.reserve(text.size());
  for (char ch : text) {
    std::size_t pos = alphabet.find(ch);
    if (pos == std::string::npos) {
      throw DataError(std::string("character '") + ch + "' not in alphabet \"" +
                      alphabet + "\"");
    }
    out.push_back(static_cast<int>(pos) + 1);
  }
  return out;
}

std::string Tokenizer::decode(const std::vector<int>& tokens) const {
  std::string out;
  out.reserve(tokens.size());
  for (int t : tokens) {
    if (t <= 0 || t > static_cast<int>(alphabet.size())) {
      throw DataError("token " + std::to_string(t) + " outside alphabet of size " +
                      std::to_string(alphabet.size()));
    }
    out.push_back(alphabet[t - 1]);
  }
  return out;
}

std::size_t ModelConfig::frame_samples() const {
  return static_cast<std::size_t>(std::llround(frame_ms * sample_rate_hz / 1000.0));
}

Model::Model(ModelConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), tok_{cfg_.alphabet}, seed_(seed) {
  if (cfg_.alphabet.empty()) throw ConfigError("model needs a nonempty alphabet");
  validate_frontend(cfg_.frontend, cfg_.frame_samples());
  register_frontend_params(store_, cfg_.frontend, cfg_.sample_rate_hz, seed_);
  register_encoder_params(store_, cfg_.encoder, cfg_.frontend.output_dim, seed_);
  register_decoder_params(store_, cfg_.decoder, cfg_.encoder.projection, tok_.vocab(),
                          seed_);
  std::size_t v1 = tok_.vocab() + 1;
  store_.create("ctc.W", {v1, cfg_.encoder.projection}, cfg_.encoder.projection, seed_);
  store_.create_zeros("ctc.b", {v1});
}

FrameMatrix Model::frame(const AudioBuffer& audio) const {
  return frame_signal(audio, cfg_.frame_ms, cfg_.shift_ms);
}

Var Model::features(Graph& g, const FrameMatrix& frames) {
  if (frames.num_frames() == 0) throw DataError("model: empty frame matrix");
  Var f = g.leaf(frames.frames);
  return frontend_forward(g, f, store_, cfg_.frontend);
}

Var Model::encode(Graph& g, Var feats) { return blstmp_encode(g, feats, store_, cfg_.encoder); }

Var Model::ctc_logits(Graph& g, Var enc) {
  return linear_seq(g, enc, store_.use(g, "ctc.W"), store_.use(g, "ctc.b"));
}

Model::Losses Model::utterance_loss(Graph& g, const FrameMatrix& frames,
                                    const std::vector<int>& target, double lambda,
                                    const AugmentPlan* plan) {
  Var feats = features(g, frames);
  if (plan != nullptr) feats = apply_plan(g, feats, *plan);
  Var enc = encode(g, feats);
  Var l_ctc = ctc_loss(g, ctc_logits(g, enc), target);
  Var l_att = attention_loss(g, enc, target, store_, cfg_.decoder, tok_.vocab());
  Losses out;
  out.att = l_att.value()[0];
  out.ctc = l_ctc.value()[0];
  out.joint = joint_loss(g, l_att, l_ctc, lambda);
  return out;
}

Tensor Model::ctc_posteriors(const FrameMatrix& frames) {
  Graph g;
  Var enc = encode(g, features(g, frames));
  Var post = softmax_rows(g, ctc_logits(g, enc));
  return post.value();
}

FeatureSequence Model::extract(const FrameMatrix& frames) {
  return extract_features(frames, store_, cfg_.frontend);
}

std::size_t Model::frontend_param_count() const {
  return count_frontend_params(cfg_.frontend).total;
}

std::size_t Model::backend_param_count() const {
  std::size_t enc = encoder_param_count(cfg_.encoder, cfg_.frontend.output_dim);
  std::size_t dec = decoder_param_count(cfg_.decoder, cfg_.encoder.projection, tok_.vocab());
  std::size_t head = (tok_.vocab() + 1) * cfg_.encoder.projection + tok_.vocab() + 1;
  return enc + dec + head;
}

}  // namespace lsc
