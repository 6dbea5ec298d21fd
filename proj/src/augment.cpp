#include "lsc/augment.hpp"

#include <algorithm>
#include <cmath>

namespace lsc {

AugmentPlan sample_plan(const AugmentPolicy& policy, std::size_t t_len,
                        std::size_t channels, Rng& rng) {
  AugmentPlan plan;
  if (!policy.enabled || t_len == 0) return plan;
  for (std::size_t i = 0; i < policy.num_time_masks; ++i) {
    std::size_t wmax = std::min(policy.max_time_mask_frames, t_len);
    std::size_t w = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(wmax)));
    std::size_t start = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(t_len - w)));
    if (w > 0) plan.time_masks.push_back({start, w});
  }
  for (std::size_t i = 0; i < policy.num_channel_masks; ++i) {
    std::size_t wmax = std::min(policy.max_channel_mask, channels);
    std::size_t w = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(wmax)));
    std::size_t start = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(channels - w)));
    if (w > 0) plan.channel_masks.push_back({start, w});
  }
  if (policy.warp_window > 0 && t_len > 2 * policy.warp_window) {
    std::size_t w = policy.warp_window;
    plan.warp = true;
    plan.warp_center = static_cast<std::size_t>(
        rng.uniform_int(static_cast<int>(w), static_cast<int>(t_len - w) - 1));
    plan.warp_shift = rng.uniform_int(-static_cast<int>(w), static_cast<int>(w));
  }
  return plan;
}

namespace {

Tensor mask_tensor(const Shape& shape, const AugmentPlan& plan) {
  Tensor mask(shape);
  mask.fill(1.0);
  std::size_t t_len = shape[0], c_len = shape[1];
  for (const MaskSpan& m : plan.time_masks)
    for (std::size_t t = m.start; t < std::min(m.start + m.len, t_len); ++t)
      for (std::size_t c = 0; c < c_len; ++c) mask.at(t, c) = 0.0;
  for (const MaskSpan& m : plan.channel_masks)
    for (std::size_t c = m.start; c < std::min(m.start + m.len, c_len); ++c)
      for (std::size_t t = 0; t < t_len; ++t) mask.at(t, c) = 0.0;
  return mask;
}

// For each output frame: the two source frames and interpolation weight of a
// piecewise-linear map fixing 0 and T-1 and moving warp_center by warp_shift.
struct WarpRow {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double frac = 0.0;
};

std::vector<WarpRow> warp_rows(std::size_t t_len, const AugmentPlan& plan) {
  std::vector<WarpRow> rows(t_len);
  double c_src = static_cast<double>(plan.warp_center);
  double c_dst = c_src + static_cast<double>(plan.warp_shift);
  double last = static_cast<double>(t_len - 1);
  for (std::size_t t = 0; t < t_len; ++t) {
    double x = static_cast<double>(t);
    double u;
    if (x <= c_dst) {
      u = (c_dst > 0.0) ? x * (c_src / c_dst) : 0.0;
    } else {
      u = c_src + (x - c_dst) * ((last - c_src) / (last - c_dst));
    }
    u = std::clamp(u, 0.0, last);
    std::size_t lo = static_cast<std::size_t>(std::floor(u));
    std::size_t hi = std::min(lo + 1, t_len - 1);
    rows[t] = {lo, hi, u - static_cast<double>(lo)};
  }
  return rows;
}

}  // namespace

Tensor apply_masks(const Tensor& features, const AugmentPlan& plan) {
  Tensor mask = mask_tensor(features.shape(), plan);
  Tensor out(features.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = features[i] * mask[i];
  return out;
}

Tensor apply_time_warp(const Tensor& features, const AugmentPlan& plan) {
  if (!plan.warp) return features;
  std::size_t t_len = features.dim(0), c_len = features.dim(1);
  std::vector<WarpRow> rows = warp_rows(t_len, plan);
  Tensor out({t_len, c_len});
  for (std::size_t t = 0; t < t_len; ++t) {
    const WarpRow& r = rows[t];
    for (std::size_t c = 0; c < c_len; ++c) {
      out.at(t, c) = (1.0 - r.frac) * features.at(r.lo, c) +
                     r.frac * features.at(r.hi, c);
    }
  }
  return out;
}

Tensor apply_plan(const Tensor& features, const AugmentPlan& plan) {
  return apply_masks(apply_time_warp(features, plan), plan);
}

Var apply_plan(Graph& g, Var features, const AugmentPlan& plan) {
  Var x = features;
  if (plan.warp) {
    std::size_t t_len = x.value().dim(0), c_len = x.value().dim(1);
    auto rows = std::make_shared<std::vector<WarpRow>>(warp_rows(t_len, plan));
    Tensor out({t_len, c_len});
    for (std::size_t t = 0; t < t_len; ++t) {
      const WarpRow& r = (*rows)[t];
      for (std::size_t c = 0; c < c_len; ++c)
        out.at(t, c) = (1.0 - r.frac) * x.value().at(r.lo, c) +
                       r.frac * x.value().at(r.hi, c);
    }
    x = g.make(std::move(out), {x}, [rows, t_len, c_len](Node& nd, std::vector<Node*>& ps) {
      Tensor& gx = Graph::ensure_grad(*ps[0]);
      for (std::size_t t = 0; t < t_len; ++t) {
        const WarpRow& r = (*rows)[t];
        for (std::size_t c = 0; c < c_len; ++c) {
          double go = nd.grad.at(t, c);
          gx.at(r.lo, c) += (1.0 - r.frac) * go;
          gx.at(r.hi, c) += r.frac * go;
        }
      }
    });
  }
  if (!plan.time_masks.empty() || !plan.channel_masks.empty()) {
    x = mul_const(g, x, mask_tensor(x.value().shape(), plan));
  }
  return x;
}

std::vector<double> apply_raw_masks(const std::vector<double>& samples,
                                    const AugmentPolicy& policy, int sample_rate_hz,
                                    Rng& rng) {
  std::vector<double> out = samples;
  if (!policy.enabled || !policy.raw_audio_mask || samples.empty()) return out;
  std::size_t max_len = static_cast<std::size_t>(
      policy.max_raw_mask_ms * sample_rate_hz / 1000.0);
  max_len = std::min(max_len, samples.size());
  for (std::size_t i = 0; i < policy.num_raw_masks; ++i) {
    std::size_t w = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(max_len)));
    std::size_t start = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(samples.size() - w)));
    std::fill(out.begin() + start, out.begin() + start + w, 0.0);
  }
  return out;
}

}  // namespace lsc
