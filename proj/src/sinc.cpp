#include "lsc/sinc.hpp"

#include <algorithm>
#include <cmath>

#include "lsc/common.hpp"

namespace lsc {

namespace {

// 2*f*sinc(2*pi*f*n) with the n = 0 limit handled by continuity.
double scaled_sinc(double f, int n) {
  if (n == 0) return 2.0 * f;
  double x = 2.0 * M_PI * f * static_cast<double>(n);
  return std::sin(x) / (M_PI * static_cast<double>(n));
}

// d/df of scaled_sinc
double scaled_sinc_df(double f, int n) {
  return 2.0 * std::cos(2.0 * M_PI * f * static_cast<double>(n));
}

void check_band(double f1, double f2) {
  if (!(f1 > 0.0) || f1 > f2 || f2 > 0.5) {
    throw ConfigError("build_kernel: need 0 < f1 <= f2 <= 0.5, got f1=" +
                      std::to_string(f1) + " f2=" + std::to_string(f2));
  }
}

void check_odd(std::size_t kernel_len) {
  if (kernel_len < 3 || kernel_len % 2 == 0) {
    throw ConfigError("kernel length must be odd and >= 3, got " +
                      std::to_string(kernel_len));
  }
}

}  // namespace

Cutoffs cutoffs_from_params(double w1, double w2, const SincBankConfig& bank) {
  Cutoffs c;
  double f1_raw = std::fabs(w1);
  double sign_w1 = w1 > 0.0 ? 1.0 : (w1 < 0.0 ? -1.0 : 0.0);
  bool f1_clamped = f1_raw < bank.min_low;
  c.f1 = f1_clamped ? bank.min_low : f1_raw;
  c.df1_dw1 = f1_clamped ? 0.0 : sign_w1;

  double band_raw = std::fabs(w2 - w1);
  double sign_band = (w2 - w1) > 0.0 ? 1.0 : ((w2 - w1) < 0.0 ? -1.0 : 0.0);
  bool band_clamped = band_raw < bank.min_band;
  double band = band_clamped ? bank.min_band : band_raw;
  double dband_dw1 = band_clamped ? 0.0 : -sign_band;
  double dband_dw2 = band_clamped ? 0.0 : sign_band;

  bool top_clamped = c.f1 + band > 0.5;
  c.f2 = top_clamped ? 0.5 : c.f1 + band;
  c.df2_dw1 = top_clamped ? 0.0 : c.df1_dw1 + dband_dw1;
  c.df2_dw2 = top_clamped ? 0.0 : dband_dw2;
  return c;
}

std::vector<double> hamming_window_centered(std::size_t kernel_len) {
  check_odd(kernel_len);
  // 0.54 - 0.46*cos(2*pi*n/L) evaluated on the peak-centered grid
  // n = d + L/2, i.e. 0.54 + 0.46*cos(2*pi*d/L); the peak multiplies the
  // center tap and the window is symmetric in d.
  std::size_t half = (kernel_len - 1) / 2;
  std::vector<double> w(kernel_len);
  for (std::size_t i = 0; i < kernel_len; ++i) {
    double d = static_cast<double>(i) - static_cast<double>(half);
    w[i] = 0.54 + 0.46 * std::cos(2.0 * M_PI * d / static_cast<double>(kernel_len));
  }
  return w;
}

std::vector<double> build_kernel_unwindowed(double f1, double f2, std::size_t kernel_len) {
  check_band(f1, f2);
  check_odd(kernel_len);
  int half = static_cast<int>((kernel_len - 1) / 2);
  std::vector<double> k(kernel_len);
  for (int n = -half; n <= half; ++n) {
    k[n + half] = scaled_sinc(f2, n) - scaled_sinc(f1, n);
  }
  return k;
}

std::vector<double> build_kernel(double f1, double f2, std::size_t kernel_len) {
  std::vector<double> k = build_kernel_unwindowed(f1, f2, kernel_len);
  std::vector<double> w = hamming_window_centered(kernel_len);
  for (std::size_t i = 0; i < kernel_len; ++i) k[i] *= w[i];
  return k;
}

void kernel_partials(double f1, double f2, std::size_t kernel_len,
                     std::vector<double>& dk_df1, std::vector<double>& dk_df2) {
  check_band(f1, f2);
  check_odd(kernel_len);
  int half = static_cast<int>((kernel_len - 1) / 2);
  std::vector<double> w = hamming_window_centered(kernel_len);
  dk_df1.resize(kernel_len);
  dk_df2.resize(kernel_len);
  for (int n = -half; n <= half; ++n) {
    std::size_t i = static_cast<std::size_t>(n + half);
    dk_df1[i] = -w[i] * scaled_sinc_df(f1, n);
    dk_df2[i] = w[i] * scaled_sinc_df(f2, n);
  }
}

Tensor materialize_kernels(const SincBankConfig& bank, const Tensor& w1, const Tensor& w2) {
  if (w1.numel() != bank.num_filters || w2.numel() != bank.num_filters) {
    throw DimensionError("materialize_kernels: parameter length mismatch");
  }
  Tensor out({bank.num_filters, bank.kernel_len});
  for (std::size_t f = 0; f < bank.num_filters; ++f) {
    Cutoffs c = cutoffs_from_params(w1[f], w2[f], bank);
    std::vector<double> k = build_kernel(c.f1, c.f2, bank.kernel_len);
    std::copy(k.begin(), k.end(), out.data() + f * bank.kernel_len);
  }
  return out;
}

double mel_from_hz(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double hz_from_mel(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

void mel_initialize(const SincBankConfig& bank, double f_min_hz, double f_max_hz,
                    int sample_rate_hz, Tensor& w1, Tensor& w2) {
  double nyquist = sample_rate_hz / 2.0;
  if (!(f_min_hz > 0.0) || !(f_min_hz < f_max_hz) || f_max_hz > nyquist) {
    throw ConfigError("mel_initialize: need 0 < f_min < f_max <= sample_rate/2, got " +
                      std::to_string(f_min_hz) + ".." + std::to_string(f_max_hz));
  }
  std::size_t n = bank.num_filters;
  w1 = Tensor({n});
  w2 = Tensor({n});
  double mel_lo = mel_from_hz(f_min_hz);
  double mel_hi = mel_from_hz(f_max_hz);
  for (std::size_t i = 0; i <= n; ++i) {
    double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n);
    double norm = hz_from_mel(mel) / static_cast<double>(sample_rate_hz);
    if (i < n) w1[i] = norm;
    if (i > 0) w2[i - 1] = norm;
  }
}

std::vector<FilterInfo> inspect_filters(const SincBankConfig& bank, const Tensor& w1,
                                        const Tensor& w2, int sample_rate_hz) {
  std::vector<FilterInfo> rows(bank.num_filters);
  double sr = static_cast<double>(sample_rate_hz);
  for (std::size_t f = 0; f < bank.num_filters; ++f) {
    Cutoffs c = cutoffs_from_params(w1[f], w2[f], bank);
    std::vector<double> k = build_kernel(c.f1, c.f2, bank.kernel_len);
    double amp = 0.0;
    for (double v : k) amp = std::max(amp, std::fabs(v));
    rows[f] = {f, c.f1 * sr, c.f2 * sr, 0.5 * (c.f1 + c.f2) * sr,
               (c.f2 - c.f1) * sr, amp};
  }
  std::stable_sort(rows.begin(), rows.end(), [](const FilterInfo& a, const FilterInfo& b) {
    return a.center_hz < b.center_hz;
  });
  return rows;
}

Var sinc_conv(Graph& g, Var frames, Var w1, Var w2, const SincBankConfig& bank,
              std::size_t stride) {
  const Tensor& x = frames.value();
  if (x.rank() != 2) throw DimensionError("sinc_conv expects (T, S) frames");
  std::size_t t = x.dim(0), s = x.dim(1);
  std::size_t L = bank.kernel_len;
  if (s < L) {
    throw ConfigError("sinc_conv: frame length " + std::to_string(s) +
                      " shorter than kernel length " + std::to_string(L));
  }
  if (stride == 0) throw ConfigError("sinc_conv: stride must be >= 1");
  std::size_t f_count = bank.num_filters;
  std::size_t w_out = (s - L) / stride + 1;

  Tensor kernels = materialize_kernels(bank, w1.value(), w2.value());
  Tensor out({t, f_count, w_out});
  for (std::size_t i = 0; i < t; ++i) {
    const double* xr = x.data() + i * s;
    for (std::size_t f = 0; f < f_count; ++f) {
      const double* kr = kernels.data() + f * L;
      for (std::size_t p = 0; p < w_out; ++p) {
        const double* seg = xr + p * stride;
        double acc = 0.0;
        for (std::size_t j = 0; j < L; ++j) acc += seg[j] * kr[j];
        out.at(i, f, p) = acc;
      }
    }
  }

  auto bank_copy = bank;
  auto kern = std::make_shared<Tensor>(std::move(kernels));
  return g.make(
      std::move(out), {frames, w1, w2},
      [bank_copy, stride, t, s, L, f_count, w_out, kern](Node& nd, std::vector<Node*>& ps) {
        Node& nf = *ps[0];
        Node& nw1 = *ps[1];
        Node& nw2 = *ps[2];
        bool want_frames = nf.requires_grad;
        bool want_w = nw1.requires_grad || nw2.requires_grad;

        // Accumulate d(loss)/d(kernel tap) once, then chain through the
        // kernel construction into (w1, w2).
        Tensor gk({f_count, L});
        Tensor* gframes = want_frames ? &Graph::ensure_grad(nf) : nullptr;
        for (std::size_t i = 0; i < t; ++i) {
          const double* xr = nf.value.data() + i * s;
          for (std::size_t f = 0; f < f_count; ++f) {
            const double* kr = kern->data() + f * L;
            double* gkr = gk.data() + f * L;
            for (std::size_t p = 0; p < w_out; ++p) {
              double go = nd.grad.at(i, f, p);
              if (go == 0.0) continue;
              const double* seg = xr + p * stride;
              if (want_w) {
                for (std::size_t j = 0; j < L; ++j) gkr[j] += go * seg[j];
              }
              if (gframes) {
                double* gseg = gframes->data() + i * s + p * stride;
                for (std::size_t j = 0; j < L; ++j) gseg[j] += go * kr[j];
              }
            }
          }
        }
        if (!want_w) return;
        Tensor& gw1 = Graph::ensure_grad(nw1);
        Tensor& gw2 = Graph::ensure_grad(nw2);
        std::vector<double> dk_df1, dk_df2;
        for (std::size_t f = 0; f < f_count; ++f) {
          Cutoffs c = cutoffs_from_params(nw1.value[f], nw2.value[f], bank_copy);
          kernel_partials(c.f1, c.f2, L, dk_df1, dk_df2);
          const double* gkr = gk.data() + f * L;
          double gf1 = 0.0, gf2 = 0.0;
          for (std::size_t j = 0; j < L; ++j) {
            gf1 += gkr[j] * dk_df1[j];
            gf2 += gkr[j] * dk_df2[j];
          }
          gw1[f] += gf1 * c.df1_dw1 + gf2 * c.df2_dw1;
          gw2[f] += gf2 * c.df2_dw2;
        }
      });
}

}  // namespace lsc
