#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "retone/errors.hpp"
#include "retone/types.hpp"

namespace retone {

enum class SpectrogramScale { linear, log };

struct MelConfig {
  int n_mels = 160;
  double f_min = 0.0;
  double f_max = 0.0;  // 0 means Nyquist
};

struct SpectrogramConfig {
  int window_size = 1024;
  int hop = 256;
  SpectrogramScale scale = SpectrogramScale::linear;
  std::optional<MelConfig> mel;
  double log_epsilon = 1e-5;

  /// hop = N/4.
  static SpectrogramConfig with_default_hop(int window_size) {
    SpectrogramConfig c;
    c.window_size = window_size;
    c.hop = window_size / 4;
    return c;
  }

  int n_fft_bins() const { return window_size / 2 + 1; }
  int n_rows() const { return mel ? mel->n_mels : n_fft_bins(); }

  void validate() const {
    if (window_size < 2) throw UsageError("spectrogram: window_size must be >= 2");
    if (hop < 1) throw UsageError("spectrogram: hop must be >= 1");
    if (!(log_epsilon > 0.0)) throw UsageError("spectrogram: log_epsilon must be positive");
    if (mel && mel->n_mels < 1) throw UsageError("spectrogram: n_mels must be >= 1");
  }
};

/// Time-frequency values, stored with one column per frame so frames are
/// contiguous; values(bin, frame).
template <typename S>
struct Spectrogram {
  MatrixX<S> values;
  SpectrogramConfig config;

  Eigen::Index n_bins() const { return values.rows(); }
  Eigen::Index n_frames() const { return values.cols(); }
};

/// Periodic Hann window, w[n] = 0.5 (1 - cos(2 pi n / N)).
template <typename S>
VectorX<S> hann_window(int n) {
  VectorX<S> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = static_cast<S>(0.5 * (1.0 - std::cos(2.0 * M_PI * i / n)));
  return w;
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

/// Triangular mel filters, peak value 1, centers uniformly spaced on the
/// mel scale. Triangles narrower than one FFT bin are widened to a one-bin
/// half-width so every row keeps at least one positive sample; this matters
/// for 160 bands at the smaller window sizes.
template <typename S>
MatrixX<S> mel_filterbank(const MelConfig& mel, int n_fft_bins, int sample_rate) {
  if (mel.n_mels < 1) throw UsageError("mel_filterbank: n_mels must be >= 1");
  if (n_fft_bins < 2) throw UsageError("mel_filterbank: need at least 2 bins");
  const double nyquist = sample_rate / 2.0;
  const double f_max = mel.f_max > 0.0 ? mel.f_max : nyquist;
  if (!(mel.f_min >= 0.0 && mel.f_min < f_max && f_max <= nyquist + 1e-9))
    throw UsageError("mel_filterbank: need 0 <= f_min < f_max <= Nyquist");
  if (mel.n_mels > n_fft_bins)
    throw DataError("mel_filterbank: n_mels too large for bin resolution");

  const double bin_hz = nyquist / (n_fft_bins - 1);
  const double mel_lo = hz_to_mel(mel.f_min);
  const double mel_hi = hz_to_mel(f_max);
  const double mel_step = (mel_hi - mel_lo) / (mel.n_mels + 1);

  MatrixX<S> fb = MatrixX<S>::Zero(mel.n_mels, n_fft_bins);
  for (int m = 0; m < mel.n_mels; ++m) {
    const double center = mel_to_hz(mel_lo + (m + 1) * mel_step) / bin_hz;
    double left = mel_to_hz(mel_lo + m * mel_step) / bin_hz;
    double right = mel_to_hz(mel_lo + (m + 2) * mel_step) / bin_hz;
    left = std::min(left, center - 1.0);
    right = std::max(right, center + 1.0);
    const int b0 = std::max(0, static_cast<int>(std::ceil(left)));
    const int b1 = std::min(n_fft_bins - 1, static_cast<int>(std::floor(right)));
    for (int b = b0; b <= b1; ++b) {
      const double v = b <= center ? (b - left) / (center - left) : (right - b) / (right - center);
      if (v > 0.0) fb(m, b) = static_cast<S>(v);
    }
  }
  return fb;
}

/// Center frequencies (Hz) of the mel filters, ascending.
inline std::vector<double> mel_center_frequencies(const MelConfig& mel, int sample_rate) {
  const double f_max = mel.f_max > 0.0 ? mel.f_max : sample_rate / 2.0;
  const double mel_lo = hz_to_mel(mel.f_min);
  const double mel_step = (hz_to_mel(f_max) - mel_lo) / (mel.n_mels + 1);
  std::vector<double> centers(static_cast<std::size_t>(mel.n_mels));
  for (int m = 0; m < mel.n_mels; ++m) centers[static_cast<std::size_t>(m)] = mel_to_hz(mel_lo + (m + 1) * mel_step);
  return centers;
}

namespace detail {

/// Frame-wise windowed real FFT. Spectra has one column per frame holding
/// bins 0..N/2. No centering: frame t covers samples [t*hop, t*hop + N).
template <typename S>
void stft_complex(const ArrayX<S>& x, const SpectrogramConfig& cfg, const VectorX<S>& window,
                  MatrixX<std::complex<S>>& spectra) {
  const int n_window = cfg.window_size;
  if (x.size() < n_window) throw DataError("stft: input shorter than the analysis window");
  const auto n_frames = static_cast<Eigen::Index>((x.size() - n_window) / cfg.hop + 1);
  const int n_bins = cfg.n_fft_bins();

  Eigen::FFT<S> fft;
  fft.SetFlag(Eigen::FFT<S>::HalfSpectrum);
  spectra.resize(n_bins, n_frames);
  VectorX<S> frame(n_window);
  VectorX<std::complex<S>> spectrum(n_bins);
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    frame = x.segment(t * cfg.hop, n_window).matrix().cwiseProduct(window);
    fft.fwd(spectrum, frame);
    spectra.col(t) = spectrum;
  }
}

}  // namespace detail

/// Magnitude STFT over bins 0..N/2; frame count floor((len-N)/hop)+1.
template <typename S>
Spectrogram<S> stft_magnitude(const ArrayX<S>& x, const SpectrogramConfig& config) {
  config.validate();
  const VectorX<S> window = hann_window<S>(config.window_size);
  MatrixX<std::complex<S>> spectra;
  detail::stft_complex(x, config, window, spectra);
  Spectrogram<S> out;
  out.config = config;
  out.values = spectra.cwiseAbs();
  return out;
}

template <typename S>
Spectrogram<S> stft_magnitude(const AudioBuffer& buffer, const SpectrogramConfig& config) {
  return stft_magnitude<S>(buffer.to_array<S>(), config);
}

/// Log scale maps v to ln(v + epsilon); linear scale is the identity.
template <typename S>
Spectrogram<S> apply_scale(const Spectrogram<S>& spec, SpectrogramScale scale, double log_epsilon) {
  if (scale == SpectrogramScale::linear) return spec;
  Spectrogram<S> out;
  out.config = spec.config;
  out.config.scale = SpectrogramScale::log;
  out.values = (spec.values.array() + static_cast<S>(log_epsilon)).log().matrix();
  return out;
}

/// Cached forward state for frontend_backward.
template <typename S>
struct FrontendTape {
  SpectrogramConfig config;
  int sample_rate = 0;
  Eigen::Index input_length = 0;
  VectorX<S> window;
  MatrixX<std::complex<S>> spectra;  // bins x frames
  MatrixX<S> linear_mag;             // |spectra|
  MatrixX<S> mel_matrix;             // empty when no mel projection
  MatrixX<S> pre_log;                // representation before log; empty when linear
  MatrixX<S> output;
};

/// Full discriminator/metrics front end: STFT magnitude, optional mel
/// projection, optional log. Returns rows x frames (rows = bins or mels).
template <typename S>
MatrixX<S> frontend_forward(const ArrayX<S>& x, const SpectrogramConfig& config, int sample_rate,
                            FrontendTape<S>* tape = nullptr) {
  config.validate();
  const VectorX<S> window = hann_window<S>(config.window_size);
  MatrixX<std::complex<S>> spectra;
  detail::stft_complex(x, config, window, spectra);
  MatrixX<S> rep = spectra.cwiseAbs();
  MatrixX<S> linear_mag;
  if (tape) linear_mag = rep;

  MatrixX<S> mel_matrix;
  if (config.mel) {
    mel_matrix = mel_filterbank<S>(*config.mel, config.n_fft_bins(), sample_rate);
    rep = mel_matrix * rep;
  }
  MatrixX<S> pre_log;
  if (config.scale == SpectrogramScale::log) {
    if (tape) pre_log = rep;
    rep = (rep.array() + static_cast<S>(config.log_epsilon)).log().matrix();
  }
  if (tape) {
    tape->config = config;
    tape->sample_rate = sample_rate;
    tape->input_length = x.size();
    tape->window = window;
    tape->spectra = std::move(spectra);
    tape->linear_mag = std::move(linear_mag);
    tape->mel_matrix = std::move(mel_matrix);
    tape->pre_log = std::move(pre_log);
    tape->output = rep;
  }
  return rep;
}

/// Gradient of a scalar loss w.r.t. the input samples, given the gradient
/// w.r.t. the representation. At exact-zero magnitude bins the subgradient
/// is taken as 0.
template <typename S>
ArrayX<S> frontend_backward(const FrontendTape<S>& tape, const MatrixX<S>& upstream) {
  const auto& cfg = tape.config;
  const int n_window = cfg.window_size;
  const int n_bins = cfg.n_fft_bins();
  const Eigen::Index n_frames = tape.spectra.cols();
  if (upstream.cols() != n_frames || upstream.rows() != cfg.n_rows())
    throw UsageError("frontend_backward: upstream shape mismatch");

  MatrixX<S> grad_rep = upstream;
  if (cfg.scale == SpectrogramScale::log)
    grad_rep = grad_rep.cwiseQuotient((tape.pre_log.array() + static_cast<S>(cfg.log_epsilon)).matrix());
  if (cfg.mel) grad_rep = tape.mel_matrix.transpose() * grad_rep;

  // d|X_k|/dx_n = w_n Re[X_k e^{+i 2 pi k n / N}] / |X_k|; summing over the
  // one-sided bins is an inverse DFT of c_k = u_k X_k / |X_k| zero-padded to
  // length N, scaled by N.
  Eigen::FFT<S> fft;
  ArrayX<S> dx = ArrayX<S>::Zero(tape.input_length);
  std::vector<std::complex<S>> c(static_cast<std::size_t>(n_window), std::complex<S>(0, 0));
  std::vector<std::complex<S>> time(static_cast<std::size_t>(n_window));
  for (Eigen::Index t = 0; t < n_frames; ++t) {
    for (int k = 0; k < n_bins; ++k) {
      const S mag = tape.linear_mag(k, t);
      c[static_cast<std::size_t>(k)] =
          mag > S(0) ? grad_rep(k, t) * tape.spectra(k, t) / mag : std::complex<S>(0, 0);
    }
    fft.inv(time, c);
    const auto offset = static_cast<Eigen::Index>(t) * cfg.hop;
    for (int n = 0; n < n_window; ++n)
      dx[offset + n] += tape.window[n] * static_cast<S>(n_window) * time[static_cast<std::size_t>(n)].real();
  }
  return dx;
}

}  // namespace retone
