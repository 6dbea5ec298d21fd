#pragma once

#include <cstdint>
#include <vector>

#include "lsc/autodiff.hpp"
#include "lsc/params.hpp"
#include "lsc/tensor.hpp"

namespace lsc {

// Learnable sinc-convolution filter bank. Each filter is a bandpass whose
// kernel is built from two raw parameters (w1, w2); all frequencies are in
// cycles/sample (Nyquist = 0.5), Hz only appears at I/O boundaries.
struct SincBankConfig {
  std::size_t num_filters = 128;
  std::size_t kernel_len = 101;  // odd
  double min_low = 50.0 / 16000.0;   // floor on f1
  double min_band = 50.0 / 16000.0;  // floor on f2 - f1
};

struct Cutoffs {
  double f1 = 0.0;
  double f2 = 0.0;
  // Partials through the clamped branches; zero where a floor or the Nyquist
  // ceiling is active.
  double df1_dw1 = 0.0;
  double df2_dw1 = 0.0;
  double df2_dw2 = 0.0;
};

// f1 = max(|w1|, min_low); f2 = min(f1 + max(|w2 - w1|, min_band), 0.5).
Cutoffs cutoffs_from_params(double w1, double w2, const SincBankConfig& bank);

// Bandpass kernel 2*f2*sinc(2*pi*f2*n) - 2*f1*sinc(2*pi*f1*n) over
// n = -(L-1)/2 .. +(L-1)/2, multiplied by a Hamming window whose peak sits on
// the center tap, keeping the kernel exactly symmetric.
std::vector<double> build_kernel(double f1, double f2, std::size_t kernel_len);
std::vector<double> build_kernel_unwindowed(double f1, double f2, std::size_t kernel_len);
std::vector<double> hamming_window_centered(std::size_t kernel_len);

// d(kernel)/d(f1) and d(kernel)/d(f2), windowed.
void kernel_partials(double f1, double f2, std::size_t kernel_len,
                     std::vector<double>& dk_df1, std::vector<double>& dk_df2);

// Materialized kernels for the bank's current (w1, w2).
Tensor materialize_kernels(const SincBankConfig& bank, const Tensor& w1, const Tensor& w2);

// HTK mel scale.
double mel_from_hz(double hz);
double hz_from_mel(double mel);

// Initializes (w1, w2) so the derived cutoffs follow num_filters+1 mel-spaced
// points between f_min_hz and f_max_hz (subject to the bank's floors).
void mel_initialize(const SincBankConfig& bank, double f_min_hz, double f_max_hz,
                    int sample_rate_hz, Tensor& w1, Tensor& w2);

struct FilterInfo {
  std::size_t index = 0;
  double f1_hz = 0.0;
  double f2_hz = 0.0;
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double amplitude = 0.0;  // max |windowed kernel tap|
};

// Per-filter table sorted by center frequency.
std::vector<FilterInfo> inspect_filters(const SincBankConfig& bank, const Tensor& w1,
                                        const Tensor& w2, int sample_rate_hz);

// Fused tape op: valid correlation of every frame row with every windowed
// kernel at the given stride, differentiable w.r.t. frames, w1 and w2.
//   frames (T, S), w1/w2 (F,)  ->  (T, F, floor((S - L)/stride) + 1)
Var sinc_conv(Graph& g, Var frames, Var w1, Var w2, const SincBankConfig& bank,
              std::size_t stride);

}  // namespace lsc
