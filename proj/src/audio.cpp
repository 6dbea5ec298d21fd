#include "lsc/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "lsc/common.hpp"

namespace lsc {

namespace {

struct Cursor {
  const std::vector<unsigned char>& bytes;
  const std::string& origin;
  std::size_t pos = 0;

  void need(std::size_t n, const char* what) const {
    if (pos + n > bytes.size()) {
      throw DataError(origin + ": truncated " + what + " at byte offset " +
                      std::to_string(pos));
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = static_cast<std::uint32_t>(bytes[pos]) |
                      (static_cast<std::uint32_t>(bytes[pos + 1]) << 8) |
                      (static_cast<std::uint32_t>(bytes[pos + 2]) << 16) |
                      (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
    pos += 4;
    return v;
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes[pos]) |
                      static_cast<std::uint16_t>(bytes[pos + 1] << 8);
    pos += 2;
    return v;
  }
  std::string tag(const char* what) {
    need(4, what);
    std::string s(reinterpret_cast<const char*>(bytes.data()) + pos, 4);
    pos += 4;
    return s;
  }
};

}  // namespace

AudioBuffer parse_wav(const std::vector<unsigned char>& bytes, const std::string& origin) {
  Cursor c{bytes, origin};
  if (c.tag("RIFF id") != "RIFF") {
    throw DataError(origin + ": not a RIFF file (bad chunk id at byte offset 0)");
  }
  c.u32("RIFF size");
  if (c.tag("WAVE id") != "WAVE") {
    throw DataError(origin + ": RIFF form is not WAVE (byte offset 8)");
  }

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  AudioBuffer out;

  while (c.pos < bytes.size()) {
    std::size_t chunk_at = c.pos;
    std::string id = c.tag("chunk id");
    std::uint32_t size = c.u32("chunk size");
    if (id == "fmt ") {
      std::size_t fmt_at = c.pos;
      format = c.u16("fmt audio format");
      channels = c.u16("fmt channels");
      rate = c.u32("fmt sample rate");
      c.u32("fmt byte rate");
      c.u16("fmt block align");
      bits = c.u16("fmt bits per sample");
      if (format != 1) {
        throw DataError(origin + ": unsupported audio format " + std::to_string(format) +
                        " (only PCM=1; fmt chunk at byte offset " +
                        std::to_string(fmt_at) + ")");
      }
      if (channels != 1) {
        throw DataError(origin + ": unsupported channel count " + std::to_string(channels) +
                        " (only mono; fmt chunk at byte offset " + std::to_string(fmt_at) + ")");
      }
      if (bits != 16) {
        throw DataError(origin + ": unsupported bits per sample " + std::to_string(bits) +
                        " (only 16; fmt chunk at byte offset " + std::to_string(fmt_at) + ")");
      }
      if (rate == 0) {
        throw DataError(origin + ": sample rate is zero (fmt chunk at byte offset " +
                        std::to_string(fmt_at) + ")");
      }
      have_fmt = true;
      c.pos = fmt_at + size;  // skip any fmt extension
    } else if (id == "data") {
      if (!have_fmt) {
        throw DataError(origin + ": data chunk before fmt chunk (byte offset " +
                        std::to_string(chunk_at) + ")");
      }
      if (size % 2 != 0) {
        throw DataError(origin + ": odd data chunk size " + std::to_string(size) +
                        " for 16-bit samples (byte offset " + std::to_string(chunk_at) + ")");
      }
      c.need(size, "data chunk payload");
      std::size_t n = size / 2;
      out.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::uint16_t raw = static_cast<std::uint16_t>(bytes[c.pos + 2 * i]) |
                            static_cast<std::uint16_t>(bytes[c.pos + 2 * i + 1] << 8);
        out.samples[i] = static_cast<double>(static_cast<std::int16_t>(raw)) / 32768.0;
      }
      out.sample_rate_hz = static_cast<int>(rate);
      return out;
    } else {
      // skip unknown chunk (word-aligned)
      c.need(size + (size % 2), "unknown chunk payload");
      c.pos += size + (size % 2);
    }
  }
  throw DataError(origin + (have_fmt ? ": missing data chunk" : ": missing fmt chunk") +
                  " (end of file at byte offset " + std::to_string(c.pos) + ")");
}

AudioBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return parse_wav(bytes, path);
}

FrameMatrix frame_signal(const AudioBuffer& audio, double frame_ms, double shift_ms) {
  if (audio.samples.empty()) throw DataError("frame_signal: empty audio");
  if (!(shift_ms > 0.0) || frame_ms < shift_ms) {
    throw ConfigError("frame_signal: need frame_ms >= shift_ms > 0, got " +
                      std::to_string(frame_ms) + "/" + std::to_string(shift_ms));
  }
  std::size_t s = static_cast<std::size_t>(
      std::llround(frame_ms * audio.sample_rate_hz / 1000.0));
  std::size_t hop = static_cast<std::size_t>(
      std::llround(shift_ms * audio.sample_rate_hz / 1000.0));
  if (s == 0 || hop == 0) {
    throw ConfigError("frame_signal: frame or hop rounds to zero samples");
  }

  FrameMatrix out;
  out.frame_len_samples = s;
  out.hop_samples = hop;
  out.frame_ms = frame_ms;
  out.shift_ms = shift_ms;

  std::size_t n = audio.samples.size();
  if (n < s) {
    out.frames = Tensor({0, s});
    return out;
  }
  std::size_t t = (n - s) / hop + 1;
  out.frames = Tensor({t, s});
  for (std::size_t i = 0; i < t; ++i) {
    const double* src = audio.samples.data() + i * hop;
    double* dst = out.frames.data() + i * s;
    std::memcpy(dst, src, s * sizeof(double));
  }
  return out;
}

}  // namespace lsc
