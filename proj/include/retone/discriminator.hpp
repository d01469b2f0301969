#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "retone/errors.hpp"
#include "retone/rng.hpp"
#include "retone/spectrogram.hpp"
#include "retone/types.hpp"

namespace retone {

struct ConvLayerSpec {
  int kernel = 3;
  int out_channels = 1;
  int groups = 1;
};

enum class Representation { spectrogram, mel, log_spectrogram, log_mel };

inline const char* representation_name(Representation r) {
  switch (r) {
    case Representation::spectrogram: return "spect";
    case Representation::mel: return "mel";
    case Representation::log_spectrogram: return "log-spect";
    case Representation::log_mel: return "log-mel";
  }
  return "?";
}

inline SpectrogramConfig representation_config(Representation kind, int window_size, int n_mels,
                                               double log_epsilon) {
  SpectrogramConfig cfg = SpectrogramConfig::with_default_hop(window_size);
  cfg.log_epsilon = log_epsilon;
  if (kind == Representation::mel || kind == Representation::log_mel) {
    MelConfig mel;
    mel.n_mels = n_mels;
    cfg.mel = mel;
  }
  if (kind == Representation::log_spectrogram || kind == Representation::log_mel)
    cfg.scale = SpectrogramScale::log;
  return cfg;
}

struct DiscriminatorConfig {
  std::vector<ConvLayerSpec> layers;
  double leaky_slope = 0.2;
  SpectrogramConfig representation;

  /// Kernel sizes [10,21,21,21,21,5,3], out channels [32,128,512,1024,1024,
  /// 1024,1], groups [1,8,32,64,64,1,1].
  static std::vector<ConvLayerSpec> default_stack() {
    return {{10, 32, 1}, {21, 128, 8}, {21, 512, 32}, {21, 1024, 64},
            {21, 1024, 64}, {5, 1024, 1}, {3, 1, 1}};
  }

  static DiscriminatorConfig make(Representation kind, int window_size = 1024, int n_mels = 160,
                                  double log_epsilon = 1e-5) {
    DiscriminatorConfig cfg;
    cfg.layers = default_stack();
    cfg.representation = representation_config(kind, window_size, n_mels, log_epsilon);
    return cfg;
  }

  int in_channels(std::size_t layer) const {
    return layer == 0 ? representation.n_rows() : layers[layer - 1].out_channels;
  }

  void validate() const {
    representation.validate();
    if (layers.empty()) throw UsageError("discriminator: no layers");
    if (layers.back().out_channels != 1)
      throw UsageError("discriminator: final layer must have one output channel");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.kernel < 1 || l.out_channels < 1 || l.groups < 1)
        throw UsageError("discriminator: bad layer spec");
      if (in_channels(i) % l.groups != 0 || l.out_channels % l.groups != 0)
        throw UsageError("discriminator: channels not divisible by groups at layer " +
                         std::to_string(i + 1));
    }
  }
};

/// Weight-normalized conv layer: effective weight row o is
/// mag[o] * dir.row(o) / ||dir.row(o)||. dir columns are laid out tap-major:
/// col = tap * in_per_group + input channel.
template <typename S>
struct DiscLayerParams {
  MatrixX<S> dir;   // out_channels x (in_per_group * kernel)
  VectorX<S> mag;   // out_channels
  VectorX<S> bias;  // out_channels
};

template <typename S>
struct DiscriminatorParams {
  std::vector<DiscLayerParams<S>> layers;

  static DiscriminatorParams zeros(const DiscriminatorConfig& cfg) {
    cfg.validate();
    DiscriminatorParams p;
    p.layers.resize(cfg.layers.size());
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
      const auto& spec = cfg.layers[i];
      const int in_pg = cfg.in_channels(i) / spec.groups;
      p.layers[i].dir = MatrixX<S>::Zero(spec.out_channels, in_pg * spec.kernel);
      p.layers[i].mag = VectorX<S>::Zero(spec.out_channels);
      p.layers[i].bias = VectorX<S>::Zero(spec.out_channels);
    }
    return p;
  }

  /// Directions uniform +-sqrt(1/fan_in); magnitudes set to the initial
  /// direction norms so the initial effective weights equal the raw draw.
  static DiscriminatorParams init(const DiscriminatorConfig& cfg, Rng& rng) {
    DiscriminatorParams p = zeros(cfg);
    for (std::size_t i = 0; i < cfg.layers.size(); ++i) {
      auto& lp = p.layers[i];
      const double bound = std::sqrt(1.0 / static_cast<double>(lp.dir.cols()));
      for (Eigen::Index col = 0; col < lp.dir.cols(); ++col)
        for (Eigen::Index row = 0; row < lp.dir.rows(); ++row)
          lp.dir(row, col) = static_cast<S>(rng.uniform(-bound, bound));
      lp.mag = lp.dir.rowwise().norm();
      for (Eigen::Index o = 0; o < lp.bias.size(); ++o)
        lp.bias[o] = static_cast<S>(rng.uniform(-bound, bound));
    }
    return p;
  }

  std::vector<TensorView<S>> tensor_views() {
    std::vector<TensorView<S>> v;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      auto& lp = layers[i];
      const std::string prefix = "layer" + std::to_string(i) + ".";
      v.push_back({prefix + "dir", lp.dir.data(), lp.dir.rows(), lp.dir.cols()});
      v.push_back({prefix + "mag", lp.mag.data(), lp.mag.size(), 1});
      v.push_back({prefix + "bias", lp.bias.data(), lp.bias.size(), 1});
    }
    return v;
  }

  bool all_finite() const {
    for (const auto& l : layers)
      if (!l.dir.allFinite() || !l.mag.allFinite() || !l.bias.allFinite()) return false;
    return true;
  }
};

namespace detail {

constexpr double kWeightNormFloor = 1e-12;

/// Effective weights from the weight-norm parameterization.
template <typename S>
MatrixX<S> effective_weight(const DiscLayerParams<S>& lp, VectorX<S>* norms_out = nullptr) {
  VectorX<S> norms = lp.dir.rowwise().norm().cwiseMax(static_cast<S>(kWeightNormFloor));
  MatrixX<S> eff = lp.mag.cwiseQuotient(norms).asDiagonal() * lp.dir;
  if (norms_out) *norms_out = norms;
  return eff;
}

}  // namespace detail

/// Effective weights for every layer, computed once per parameter version.
/// Training shares one across the whole batch; forward computes its own
/// when none is supplied.
template <typename S>
struct DiscriminatorWeights {
  std::vector<MatrixX<S>> eff;
  std::vector<VectorX<S>> norms;

  static std::shared_ptr<const DiscriminatorWeights> compute(const DiscriminatorParams<S>& params) {
    auto w = std::make_shared<DiscriminatorWeights>();
    w->eff.reserve(params.layers.size());
    w->norms.reserve(params.layers.size());
    for (const auto& lp : params.layers) {
      VectorX<S> norms;
      w->eff.push_back(detail::effective_weight(lp, &norms));
      w->norms.push_back(std::move(norms));
    }
    return w;
  }
};

/// Cached forward state for discriminator_backward.
template <typename S>
struct DiscriminatorTape {
  DiscriminatorConfig config;
  int sample_rate = 0;
  FrontendTape<S> frontend;
  std::vector<MatrixX<S>> padded;  // per layer: zero-padded input activations
  std::shared_ptr<const DiscriminatorWeights<S>> weights;
  Eigen::Index n_frames = 0;
};

/// Time-frequency front end, then the grouped conv stack (stride 1, "same"
/// padding, Leaky ReLU after all but the last layer), then mean over time.
template <typename S>
S discriminator_forward(const ArrayX<S>& audio, const DiscriminatorParams<S>& params,
                        const DiscriminatorConfig& config, int sample_rate,
                        DiscriminatorTape<S>* tape = nullptr,
                        std::shared_ptr<const DiscriminatorWeights<S>> weights = nullptr) {
  config.validate();
  if (!params.all_finite()) throw NumericalError("discriminator: non-finite parameters");
  if (!weights) weights = DiscriminatorWeights<S>::compute(params);

  MatrixX<S> x = frontend_forward<S>(audio, config.representation, sample_rate,
                                     tape ? &tape->frontend : nullptr);
  const Eigen::Index t_cols = x.cols();
  if (tape) {
    tape->config = config;
    tape->sample_rate = sample_rate;
    tape->n_frames = t_cols;
    tape->padded.resize(config.layers.size());
    tape->weights = weights;
  }

  MatrixX<S> padded, y;
  for (std::size_t i = 0; i < config.layers.size(); ++i) {
    const auto& spec = config.layers[i];
    const int in_ch = config.in_channels(i);
    const int in_pg = in_ch / spec.groups;
    const int out_pg = spec.out_channels / spec.groups;
    const int pad_left = (spec.kernel - 1) / 2;

    padded = MatrixX<S>::Zero(in_ch, t_cols + spec.kernel - 1);
    padded.middleCols(pad_left, t_cols) = x;

    const MatrixX<S>& eff = weights->eff[i];
    y.resize(spec.out_channels, t_cols);
    y.colwise() = params.layers[i].bias;
    for (int g = 0; g < spec.groups; ++g) {
      auto y_g = y.middleRows(g * out_pg, out_pg);
      for (int j = 0; j < spec.kernel; ++j) {
        y_g.noalias() += eff.block(g * out_pg, j * in_pg, out_pg, in_pg) *
                         padded.block(g * in_pg, j, in_pg, t_cols);
      }
    }
    if (i + 1 < config.layers.size()) {
      const S slope = static_cast<S>(config.leaky_slope);
      y = y.array().max(y.array() * slope).matrix();
    }
    if (tape) {
      tape->padded[i] = std::move(padded);
      padded = MatrixX<S>();
    }
    x = std::move(y);
    y = MatrixX<S>();
  }
  return x.row(0).mean();
}

template <typename S>
S discriminator_forward(const AudioBuffer& audio, const DiscriminatorParams<S>& params,
                        const DiscriminatorConfig& config, DiscriminatorTape<S>* tape = nullptr) {
  return discriminator_forward<S>(audio.to_array<S>(), params, config, audio.sample_rate, tape);
}

/// Reverse-mode gradients through the conv stack, the weight-norm
/// reparameterization, and the spectral front end. Returns the gradient
/// w.r.t. the input samples; parameter gradients accumulate into `grads`.
/// param_grads=false computes only the input gradient (used when the
/// discriminator is frozen during a generator update).
template <typename S>
ArrayX<S> discriminator_backward(const DiscriminatorTape<S>& tape,
                                 const DiscriminatorParams<S>& params, S upstream,
                                 DiscriminatorParams<S>& grads, bool param_grads = true) {
  const auto& cfg = tape.config;
  const Eigen::Index t_cols = tape.n_frames;
  const auto n_layers = cfg.layers.size();
  if (grads.layers.size() != n_layers) grads = DiscriminatorParams<S>::zeros(cfg);

  // d(mean over time)/dy = upstream / T
  MatrixX<S> dy = MatrixX<S>::Constant(1, t_cols, upstream / static_cast<S>(t_cols));

  for (std::size_t ii = n_layers; ii-- > 0;) {
    const auto& spec = cfg.layers[ii];
    const int in_ch = cfg.in_channels(ii);
    const int in_pg = in_ch / spec.groups;
    const int out_pg = spec.out_channels / spec.groups;
    const int pad_left = (spec.kernel - 1) / 2;

    if (ii + 1 < n_layers) {
      // Leaky ReLU: the sign of the cached (post-activation) input of the
      // next layer matches the sign of this layer's pre-activation.
      const S slope = static_cast<S>(cfg.leaky_slope);
      const auto& next_in = tape.padded[ii + 1];
      const int next_pad = (cfg.layers[ii + 1].kernel - 1) / 2;
      dy = (next_in.middleCols(next_pad, t_cols).array() > S(0))
               .select(dy.array(), dy.array() * slope)
               .matrix();
    }

    const auto& padded = tape.padded[ii];
    MatrixX<S> d_eff;
    if (param_grads) {
      grads.layers[ii].bias += dy.rowwise().sum();
      d_eff = MatrixX<S>::Zero(spec.out_channels, in_pg * spec.kernel);
    }
    MatrixX<S> d_padded = MatrixX<S>::Zero(in_ch, t_cols + spec.kernel - 1);
    for (int g = 0; g < spec.groups; ++g) {
      const auto dy_g = dy.middleRows(g * out_pg, out_pg);
      for (int j = 0; j < spec.kernel; ++j) {
        if (param_grads)
          d_eff.block(g * out_pg, j * in_pg, out_pg, in_pg).noalias() =
              dy_g * padded.block(g * in_pg, j, in_pg, t_cols).transpose();
        d_padded.block(g * in_pg, j, in_pg, t_cols).noalias() +=
            tape.weights->eff[ii].block(g * out_pg, j * in_pg, out_pg, in_pg).transpose() * dy_g;
      }
    }

    if (param_grads) {
      // Weight norm: W = mag * dir / ||dir|| per output row, applied as
      // diagonal scalings to stay cache-friendly in column-major storage.
      const auto& lp = params.layers[ii];
      const auto& norms = tape.weights->norms[ii];
      const VectorX<S> dots = d_eff.cwiseProduct(lp.dir).rowwise().sum();
      const VectorX<S> inv = norms.cwiseInverse();
      grads.layers[ii].mag += dots.cwiseProduct(inv);
      const VectorX<S> dir_scale = lp.mag.cwiseProduct(dots).cwiseProduct(
          inv.array().cube().matrix());
      grads.layers[ii].dir += lp.mag.cwiseProduct(inv).asDiagonal() * d_eff;
      grads.layers[ii].dir -= dir_scale.asDiagonal() * lp.dir;
    }

    dy = d_padded.middleCols(pad_left, t_cols);
  }
  return frontend_backward(tape.frontend, dy);
}

/// Three sub-discriminators over window sizes [512, 1024, 2048] (hop N/4),
/// sharing the representation kind.
struct MultiScaleConfig {
  std::vector<DiscriminatorConfig> subs;

  static MultiScaleConfig make(Representation kind, std::vector<int> windows = {512, 1024, 2048},
                               int n_mels = 160, double log_epsilon = 1e-5) {
    MultiScaleConfig cfg;
    for (int w : windows) cfg.subs.push_back(DiscriminatorConfig::make(kind, w, n_mels, log_epsilon));
    return cfg;
  }

  void validate() const {
    if (subs.empty()) throw UsageError("multiscale: no sub-discriminators");
    for (const auto& s : subs) s.validate();
  }
};

template <typename S>
struct MultiScaleParams {
  std::vector<DiscriminatorParams<S>> subs;

  static MultiScaleParams zeros(const MultiScaleConfig& cfg) {
    MultiScaleParams p;
    for (const auto& s : cfg.subs) p.subs.push_back(DiscriminatorParams<S>::zeros(s));
    return p;
  }
  static MultiScaleParams init(const MultiScaleConfig& cfg, Rng& rng) {
    MultiScaleParams p;
    for (const auto& s : cfg.subs) p.subs.push_back(DiscriminatorParams<S>::init(s, rng));
    return p;
  }

  std::vector<TensorView<S>> tensor_views() {
    std::vector<TensorView<S>> v;
    for (std::size_t k = 0; k < subs.size(); ++k) {
      const std::string prefix = "sub" + std::to_string(k) + ".";
      for (auto& t : subs[k].tensor_views()) {
        t.name = prefix + t.name;
        v.push_back(t);
      }
    }
    return v;
  }

  bool all_finite() const {
    for (const auto& s : subs)
      if (!s.all_finite()) return false;
    return true;
  }
};

template <typename S>
using MultiScaleWeights = std::vector<std::shared_ptr<const DiscriminatorWeights<S>>>;

template <typename S>
MultiScaleWeights<S> multiscale_weights(const MultiScaleParams<S>& params) {
  MultiScaleWeights<S> w;
  w.reserve(params.subs.size());
  for (const auto& sub : params.subs) w.push_back(DiscriminatorWeights<S>::compute(sub));
  return w;
}

/// Independent score per sub-discriminator.
template <typename S>
std::vector<S> multiscale_forward(const ArrayX<S>& audio, const MultiScaleParams<S>& params,
                                  const MultiScaleConfig& config, int sample_rate,
                                  std::vector<DiscriminatorTape<S>>* tapes = nullptr,
                                  const MultiScaleWeights<S>* weights = nullptr) {
  config.validate();
  if (params.subs.size() != config.subs.size())
    throw UsageError("multiscale: params/config size mismatch");
  std::vector<S> scores(config.subs.size());
  if (tapes) tapes->resize(config.subs.size());
  for (std::size_t k = 0; k < config.subs.size(); ++k)
    scores[k] = discriminator_forward<S>(audio, params.subs[k], config.subs[k], sample_rate,
                                         tapes ? &(*tapes)[k] : nullptr,
                                         weights ? (*weights)[k] : nullptr);
  return scores;
}

}  // namespace retone
