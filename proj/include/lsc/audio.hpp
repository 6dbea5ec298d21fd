#pragma once

#include <string>
#include <vector>

#include "lsc/tensor.hpp"

namespace lsc {

struct AudioBuffer {
  std::vector<double> samples;  // normalized to [-1, 1]
  int sample_rate_hz = 16000;
};

// RIFF/WAVE reader, PCM 16-bit mono only. Parse failures report the byte
// offset of the offending field.
AudioBuffer read_wav(const std::string& path);
AudioBuffer parse_wav(const std::vector<unsigned char>& bytes, const std::string& origin);

// T x S matrix of frames taken every hop samples; the trailing partial frame
// is dropped.
struct FrameMatrix {
  Tensor frames;  // (T, S)
  std::size_t frame_len_samples = 0;
  std::size_t hop_samples = 0;
  double frame_ms = 0.0;
  double shift_ms = 0.0;

  std::size_t num_frames() const { return frames.empty() ? 0 : frames.dim(0); }
};

FrameMatrix frame_signal(const AudioBuffer& audio, double frame_ms = 25.0,
                         double shift_ms = 10.0);

}  // namespace lsc
