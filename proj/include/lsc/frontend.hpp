#pragma once

#include <string>
#include <vector>

#include "lsc/audio.hpp"
#include "lsc/params.hpp"
#include "lsc/sinc.hpp"

namespace lsc {

enum class Activation { kLogc, kRelu };

Activation activation_from_string(const std::string& s);
std::string to_string(Activation a);

// One depthwise block: independent 1-D kernel per (input channel, multiplier)
// pair, no cross-channel mixing. Output channel j = m * c_in + c.
struct DConvBlockConfig {
  std::size_t multiplier = 1;  // c_out = multiplier * c_in
  std::size_t kernel = 15;     // odd
  std::size_t stride = 1;
  bool bias = false;
};

struct FrontEndConfig {
  SincBankConfig sinc;
  std::size_t sinc_stride = 4;
  Activation activation = Activation::kLogc;
  std::vector<DConvBlockConfig> blocks;  // applied in order, average pool after
  std::size_t output_dim = 256;          // must equal the final channel count
  double mel_f_min_hz = 30.0;
  double mel_f_max_hz = 8000.0;

  static FrontEndConfig reference();  // 128 filters -> 256 dims, ~15.6k params
};

// Channel/width bookkeeping for each stage, validated against the frame size.
struct FrontEndGeometry {
  std::size_t frame_samples = 0;
  std::size_t sinc_width = 0;                // after the sinc layer
  std::vector<std::size_t> block_channels;   // after each block
  std::vector<std::size_t> block_widths;
};

FrontEndGeometry validate_frontend(const FrontEndConfig& cfg, std::size_t frame_samples);

// Parameter accounting. Depthwise keeps c_out*k weights; a full convolution
// would need c_in*c_out*k and the omitted pointwise stage c_in*c_out more.
std::size_t param_count(const DConvBlockConfig& cfg, std::size_t c_in);
std::size_t param_count_full(const DConvBlockConfig& cfg, std::size_t c_in);
std::size_t param_count_pointwise(const DConvBlockConfig& cfg, std::size_t c_in);

struct LayerCount {
  std::string name;
  std::string shape;
  std::size_t count = 0;
  std::string formula;
};

struct FrontEndCounts {
  std::vector<LayerCount> layers;
  std::size_t total = 0;
  std::size_t full_conv_total = 0;      // with full instead of depthwise convs
  std::size_t pointwise_saving = 0;     // sum of c_in*c_out over blocks
};

FrontEndCounts count_frontend_params(const FrontEndConfig& cfg);

// Registers (or reuses) the front-end parameters under "frontend." names.
// Sinc parameters are mel-initialized; conv kernels use the fan-in rule.
void register_frontend_params(ParameterStore& store, const FrontEndConfig& cfg,
                              int sample_rate_hz, std::uint64_t seed);

// Depthwise tape op: (T, C, W), kernels (C*mult, k) -> (T, C*mult, W').
Var depthwise_conv(Graph& g, Var x, Var kernels, Var bias, std::size_t multiplier,
                   std::size_t stride);

// Mean over the trailing within-frame axis: (T, C, W) -> (T, C).
Var avgpool_frames(Graph& g, Var x);

// Whole front-end on framed audio: sinc conv, activation, the depthwise
// blocks, then the average pool. Output is (T, output_dim).
Var frontend_forward(Graph& g, Var frames, ParameterStore& store,
                     const FrontEndConfig& cfg);

// Per-frame feature matrix plus the framing metadata it was computed from.
struct FeatureSequence {
  Tensor values;  // (T, C)
  double frame_ms = 0.0;
  double shift_ms = 0.0;
};

// Convenience value-level wrapper (no gradients).
FeatureSequence extract_features(const FrameMatrix& frames, ParameterStore& store,
                                 const FrontEndConfig& cfg);

}  // namespace lsc
