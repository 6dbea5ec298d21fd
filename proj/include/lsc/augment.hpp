#pragma once

#include <cstdint>
#include <vector>

#include "lsc/autodiff.hpp"
#include "lsc/common.hpp"
#include "lsc/frontend.hpp"

namespace lsc {

// Masking and warping policy for feature sequences, applied in training only.
struct AugmentPolicy {
  bool enabled = false;
  std::size_t num_time_masks = 2;
  std::size_t max_time_mask_frames = 40;
  std::size_t num_channel_masks = 2;
  std::size_t max_channel_mask = 30;
  std::size_t warp_window = 5;  // 0 disables warping
  // Optional masking of raw sample spans before framing.
  bool raw_audio_mask = false;
  std::size_t num_raw_masks = 1;
  double max_raw_mask_ms = 20.0;
};

// A sampled augmentation: same plan can be applied to plain values or as a
// differentiable tape transform, so the training path and the preview CLI
// share the sampling logic.
struct MaskSpan {
  std::size_t start = 0;
  std::size_t len = 0;
};

struct AugmentPlan {
  std::vector<MaskSpan> time_masks;
  std::vector<MaskSpan> channel_masks;
  bool warp = false;
  std::size_t warp_center = 0;  // source frame that moves
  std::ptrdiff_t warp_shift = 0;
};

AugmentPlan sample_plan(const AugmentPolicy& policy, std::size_t t_len,
                        std::size_t channels, Rng& rng);

// Masked frames/channels are zeroed; everything else is copied untouched.
Tensor apply_masks(const Tensor& features, const AugmentPlan& plan);

// Piecewise-linear time warp moving warp_center to warp_center + warp_shift
// with fixed endpoints; fractional source indices are linearly interpolated.
Tensor apply_time_warp(const Tensor& features, const AugmentPlan& plan);

Tensor apply_plan(const Tensor& features, const AugmentPlan& plan);

// Tape versions (mask multiplies by 0/1; warp is a fixed linear re-indexing).
Var apply_plan(Graph& g, Var features, const AugmentPlan& plan);

// Raw-sample masking for the time-domain reading of the augmentation.
std::vector<double> apply_raw_masks(const std::vector<double>& samples,
                                    const AugmentPolicy& policy, int sample_rate_hz,
                                    Rng& rng);

}  // namespace lsc
