#!/usr/bin/env python3
"""Generates the WAV fixtures under fixtures/ and prints the values that the
tests assert against. Uses only the stdlib wave writer so the fixtures are
produced independently of the C++ reader they exercise."""

import math
import struct
import wave
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"
OUT.mkdir(exist_ok=True)


def write_wav(name, samples, rate=16000):
    with wave.open(str(OUT / name), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(struct.pack("<%dh" % len(samples), *samples))


# A short pattern covering sign, extremes and mid-range values.
pattern = [0, 1, -1, 16384, -16384, 32767, -32768, 12345, -12345, 256, -256,
           8191, -8192, 100, -100, 31000]
write_wav("golden_pattern.wav", pattern)
print("golden_pattern.wav int16:", pattern)
print("golden_pattern.wav doubles:", [v / 32768.0 for v in pattern])

# One second of a 440 Hz tone at 16 kHz, amplitude 0.5.
tone = [round(0.5 * 32767.0 * math.sin(2.0 * math.pi * 440.0 * n / 16000.0))
        for n in range(16000)]
write_wav("tone_1s.wav", tone)
print("tone_1s.wav: n=%d first8=%s" % (len(tone), tone[:8]))

# HTK-style mel spacing for the filter init test: 129 points over 30..8000 Hz.
def mel(f):
    return 2595.0 * math.log10(1.0 + f / 700.0)

def mel_inv(m):
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

lo, hi, n = 30.0, 8000.0, 128
pts = [mel_inv(mel(lo) + (mel(hi) - mel(lo)) * i / n) / 16000.0
       for i in range(n + 1)]
print("mel(700) =", mel(700.0))
for i in (0, 1, 2, 64, 127, 128):
    print("point[%d] = %.17g" % (i, pts[i]))
for i in (0, 1, 64, 127):
    print("filter %d: f1_raw=%.17g f2_raw=%.17g" % (i, pts[i], pts[i + 1]))
