#include "lsc/frontend.hpp"

#include <cmath>

#include "lsc/common.hpp"

namespace lsc {

Activation activation_from_string(const std::string& s) {
  if (s == "logc") return Activation::kLogc;
  if (s == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + s + "' (expected logc or relu)");
}

std::string to_string(Activation a) {
  return a == Activation::kLogc ? "logc" : "relu";
}

FrontEndConfig FrontEndConfig::reference() {
  FrontEndConfig cfg;
  cfg.sinc.num_filters = 128;
  cfg.sinc.kernel_len = 101;
  cfg.sinc_stride = 4;
  cfg.activation = Activation::kLogc;
  cfg.blocks = {
      {1, 15, 1, false},
      {1, 15, 1, false},
      {2, 15, 1, false},
      {1, 15, 1, false},
      {1, 15, 1, false},
  };
  cfg.output_dim = 256;
  return cfg;
}

FrontEndGeometry validate_frontend(const FrontEndConfig& cfg, std::size_t frame_samples) {
  if (cfg.blocks.empty()) throw ConfigError("front-end needs at least one conv block");
  if (cfg.sinc.kernel_len % 2 == 0 || cfg.sinc.kernel_len < 3) {
    throw ConfigError("sinc kernel length must be odd and >= 3");
  }
  if (cfg.sinc_stride == 0) throw ConfigError("sinc stride must be >= 1");
  if (frame_samples < cfg.sinc.kernel_len) {
    throw ConfigError("frame of " + std::to_string(frame_samples) +
                      " samples is shorter than the sinc kernel (" +
                      std::to_string(cfg.sinc.kernel_len) + ")");
  }
  FrontEndGeometry geo;
  geo.frame_samples = frame_samples;
  geo.sinc_width = (frame_samples - cfg.sinc.kernel_len) / cfg.sinc_stride + 1;

  std::size_t channels = cfg.sinc.num_filters;
  std::size_t width = geo.sinc_width;
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    const DConvBlockConfig& blk = cfg.blocks[b];
    if (blk.multiplier == 0) throw ConfigError("block " + std::to_string(b) + ": zero multiplier");
    if (blk.kernel % 2 == 0 || blk.kernel == 0) {
      throw ConfigError("block " + std::to_string(b) + ": kernel must be odd");
    }
    if (blk.stride == 0) throw ConfigError("block " + std::to_string(b) + ": zero stride");
    if (width < blk.kernel) {
      throw ConfigError("block " + std::to_string(b) + ": width " + std::to_string(width) +
                        " is shorter than kernel " + std::to_string(blk.kernel));
    }
    width = (width - blk.kernel) / blk.stride + 1;
    channels *= blk.multiplier;
    geo.block_channels.push_back(channels);
    geo.block_widths.push_back(width);
  }
  if (channels != cfg.output_dim) {
    throw ConfigError("front-end channel chain ends at " + std::to_string(channels) +
                      " but output_dim is " + std::to_string(cfg.output_dim));
  }
  return geo;
}

std::size_t param_count(const DConvBlockConfig& cfg, std::size_t c_in) {
  std::size_t c_out = cfg.multiplier * c_in;
  return c_out * cfg.kernel + (cfg.bias ? c_out : 0);
}

std::size_t param_count_full(const DConvBlockConfig& cfg, std::size_t c_in) {
  std::size_t c_out = cfg.multiplier * c_in;
  return c_in * c_out * cfg.kernel + (cfg.bias ? c_out : 0);
}

std::size_t param_count_pointwise(const DConvBlockConfig& cfg, std::size_t c_in) {
  return c_in * (cfg.multiplier * c_in);
}

FrontEndCounts count_frontend_params(const FrontEndConfig& cfg) {
  FrontEndCounts out;
  std::size_t f = cfg.sinc.num_filters;
  out.layers.push_back({"frontend.sinc", "2 x (" + std::to_string(f) + ")", 2 * f,
                        "2*num_filters"});
  out.total = 2 * f;
  out.full_conv_total = 2 * f;
  std::size_t c_in = f;
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    const DConvBlockConfig& blk = cfg.blocks[b];
    std::size_t c_out = blk.multiplier * c_in;
    std::size_t n = param_count(blk, c_in);
    std::string shape = "(" + std::to_string(c_out) + ", " + std::to_string(blk.kernel) + ")";
    std::string formula = std::to_string(c_out) + "*" + std::to_string(blk.kernel) +
                          (blk.bias ? " + " + std::to_string(c_out) : "");
    out.layers.push_back({"frontend.dconv" + std::to_string(b), shape, n, formula});
    out.total += n;
    out.full_conv_total += param_count_full(blk, c_in);
    out.pointwise_saving += param_count_pointwise(blk, c_in);
    c_in = c_out;
  }
  return out;
}

void register_frontend_params(ParameterStore& store, const FrontEndConfig& cfg,
                              int sample_rate_hz, std::uint64_t seed) {
  if (!store.has("frontend.sinc.w1")) {
    Tensor w1, w2;
    mel_initialize(cfg.sinc, cfg.mel_f_min_hz, cfg.mel_f_max_hz, sample_rate_hz, w1, w2);
    store.create_zeros("frontend.sinc.w1", {cfg.sinc.num_filters}) = w1;
    store.create_zeros("frontend.sinc.w2", {cfg.sinc.num_filters}) = w2;
  }
  std::size_t c_in = cfg.sinc.num_filters;
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    const DConvBlockConfig& blk = cfg.blocks[b];
    std::size_t c_out = blk.multiplier * c_in;
    std::string base = "frontend.dconv" + std::to_string(b);
    store.create(base + ".kernel", {c_out, blk.kernel}, blk.kernel, seed);
    if (blk.bias) store.create_zeros(base + ".bias", {c_out});
    c_in = c_out;
  }
}

Var depthwise_conv(Graph& g, Var x, Var kernels, Var bias, std::size_t multiplier,
                   std::size_t stride) {
  const Tensor& xv = x.value();
  if (xv.rank() != 3) throw DimensionError("depthwise_conv expects (T, C, W)");
  std::size_t t = xv.dim(0), c_in = xv.dim(1), w_in = xv.dim(2);
  std::size_t c_out = c_in * multiplier;
  const Tensor& kv = kernels.value();
  if (kv.rank() != 2 || kv.dim(0) != c_out) {
    throw DimensionError("depthwise_conv kernels " + shape_str(kv.shape()) +
                         " do not match " + std::to_string(c_out) + " output channels");
  }
  std::size_t k = kv.dim(1);
  if (w_in < k) {
    throw ConfigError("depthwise_conv: width " + std::to_string(w_in) +
                      " shorter than kernel " + std::to_string(k));
  }
  if (bias.valid() && (bias.value().rank() != 1 || bias.value().dim(0) != c_out)) {
    throw DimensionError("depthwise_conv bias shape " + shape_str(bias.shape()));
  }
  std::size_t w_out = (w_in - k) / stride + 1;

  Tensor out({t, c_out, w_out});
  for (std::size_t i = 0; i < t; ++i) {
    for (std::size_t j = 0; j < c_out; ++j) {
      std::size_t src_c = j % c_in;
      const double* kr = kv.data() + j * k;
      const double* xr = xv.data() + (i * c_in + src_c) * w_in;
      double b0 = bias.valid() ? bias.value()[j] : 0.0;
      double* orow = out.data() + (i * c_out + j) * w_out;
      for (std::size_t p = 0; p < w_out; ++p) {
        const double* seg = xr + p * stride;
        double acc = b0;
        for (std::size_t q = 0; q < k; ++q) acc += seg[q] * kr[q];
        orow[p] = acc;
      }
    }
  }

  std::vector<Var> parents = {x, kernels};
  if (bias.valid()) parents.push_back(bias);
  return g.make(std::move(out), parents,
                [t, c_in, c_out, w_in, w_out, k, stride](Node& nd, std::vector<Node*>& ps) {
                  Tensor& gx = Graph::ensure_grad(*ps[0]);
                  Tensor& gk = Graph::ensure_grad(*ps[1]);
                  Tensor* gb = ps.size() > 2 ? &Graph::ensure_grad(*ps[2]) : nullptr;
                  const Tensor& xv = ps[0]->value;
                  const Tensor& kv = ps[1]->value;
                  for (std::size_t i = 0; i < t; ++i) {
                    for (std::size_t j = 0; j < c_out; ++j) {
                      std::size_t src_c = j % c_in;
                      const double* kr = kv.data() + j * k;
                      double* gkr = gk.data() + j * k;
                      const double* xr = xv.data() + (i * c_in + src_c) * w_in;
                      double* gxr = gx.data() + (i * c_in + src_c) * w_in;
                      const double* grow = nd.grad.data() + (i * c_out + j) * w_out;
                      for (std::size_t p = 0; p < w_out; ++p) {
                        double go = grow[p];
                        if (go == 0.0) continue;
                        const double* seg = xr + p * stride;
                        double* gseg = gxr + p * stride;
                        for (std::size_t q = 0; q < k; ++q) {
                          gkr[q] += go * seg[q];
                          gseg[q] += go * kr[q];
                        }
                        if (gb) (*gb)[j] += go;
                      }
                    }
                  }
                });
}

Var avgpool_frames(Graph& g, Var x) {
  const Tensor& xv = x.value();
  if (xv.rank() != 3) throw DimensionError("avgpool_frames expects (T, C, W)");
  std::size_t t = xv.dim(0), c = xv.dim(1), w = xv.dim(2);
  Tensor out({t, c});
  double inv = 1.0 / static_cast<double>(w);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const double* row = xv.data() + (i * c + j) * w;
      double acc = 0.0;
      for (std::size_t p = 0; p < w; ++p) acc += row[p];
      out.at(i, j) = acc * inv;
    }
  return g.make(std::move(out), {x}, [t, c, w, inv](Node& nd, std::vector<Node*>& ps) {
    Tensor& gx = Graph::ensure_grad(*ps[0]);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        double go = nd.grad.at(i, j) * inv;
        double* grow = gx.data() + (i * c + j) * w;
        for (std::size_t p = 0; p < w; ++p) grow[p] += go;
      }
  });
}

namespace {
Var apply_activation(Graph& g, Var x, Activation a) {
  return a == Activation::kLogc ? logc(g, x) : relu(g, x);
}
}  // namespace

Var frontend_forward(Graph& g, Var frames, ParameterStore& store,
                     const FrontEndConfig& cfg) {
  validate_frontend(cfg, frames.value().dim(1));
  Var w1 = store.use(g, "frontend.sinc.w1");
  Var w2 = store.use(g, "frontend.sinc.w2");
  Var h = sinc_conv(g, frames, w1, w2, cfg.sinc, cfg.sinc_stride);
  h = apply_activation(g, h, cfg.activation);
  for (std::size_t b = 0; b < cfg.blocks.size(); ++b) {
    const DConvBlockConfig& blk = cfg.blocks[b];
    std::string base = "frontend.dconv" + std::to_string(b);
    Var k = store.use(g, base + ".kernel");
    Var bias;
    if (blk.bias) bias = store.use(g, base + ".bias");
    h = depthwise_conv(g, h, k, bias, blk.multiplier, blk.stride);
    h = apply_activation(g, h, cfg.activation);
  }
  return avgpool_frames(g, h);
}

FeatureSequence extract_features(const FrameMatrix& frames, ParameterStore& store,
                                 const FrontEndConfig& cfg) {
  FeatureSequence out;
  out.frame_ms = frames.frame_ms;
  out.shift_ms = frames.shift_ms;
  if (frames.num_frames() == 0) {
    out.values = Tensor({0, cfg.output_dim});
    return out;
  }
  Graph g;
  Var f = g.leaf(frames.frames);
  Var feats = frontend_forward(g, f, store, cfg);
  out.values = feats.value();
  return out;
}

}  // namespace lsc
