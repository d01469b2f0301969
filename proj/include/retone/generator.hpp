#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "retone/errors.hpp"
#include "retone/rng.hpp"
#include "retone/types.hpp"

namespace retone {

struct GeneratorConfig {
  int n_stacks = 2;
  int layers_per_stack = 9;
  int kernel_size = 3;
  int dilation_growth = 2;
  int channels = 16;

  int n_layers() const { return n_stacks * layers_per_stack; }

  /// Dilation restarts at 1 for each stack: growth^(i mod layers_per_stack).
  int dilation(int layer) const {
    int d = 1;
    for (int i = 0; i < layer % layers_per_stack; ++i) d *= dilation_growth;
    return d;
  }

  /// Left context a layer needs: (kernel_size - 1) * dilation.
  int context(int layer) const { return (kernel_size - 1) * dilation(layer); }

  void validate() const {
    if (n_stacks < 1 || layers_per_stack < 1) throw UsageError("generator: need >= 1 layer");
    if (kernel_size < 1) throw UsageError("generator: kernel_size must be >= 1");
    if (dilation_growth < 1) throw UsageError("generator: dilation_growth must be >= 1");
    if (channels < 1) throw UsageError("generator: channels must be >= 1");
  }
};

/// 1 + sum over layers of (kernel_size - 1) * dilation.
inline int receptive_field(const GeneratorConfig& config) {
  config.validate();
  int rf = 1;
  for (int l = 0; l < config.n_layers(); ++l) rf += config.context(l);
  return rf;
}

template <typename S>
struct GeneratorLayerParams {
  std::vector<MatrixX<S>> filter_w;  // kernel taps, each channels x channels
  std::vector<MatrixX<S>> gate_w;
  VectorX<S> filter_b;
  VectorX<S> gate_b;
  MatrixX<S> residual_w;  // channels x channels
};

template <typename S>
struct GeneratorParams {
  MatrixX<S> input_w;  // channels x 1
  std::vector<GeneratorLayerParams<S>> layers;
  MatrixX<S> post_w;  // 1 x (n_layers * channels)
  MatrixX<S> post_b;  // 1 x 1

  static GeneratorParams zeros(const GeneratorConfig& cfg) {
    cfg.validate();
    GeneratorParams p;
    const int c = cfg.channels;
    p.input_w = MatrixX<S>::Zero(c, 1);
    p.layers.resize(static_cast<std::size_t>(cfg.n_layers()));
    for (auto& l : p.layers) {
      l.filter_w.assign(static_cast<std::size_t>(cfg.kernel_size), MatrixX<S>::Zero(c, c));
      l.gate_w.assign(static_cast<std::size_t>(cfg.kernel_size), MatrixX<S>::Zero(c, c));
      l.filter_b = VectorX<S>::Zero(c);
      l.gate_b = VectorX<S>::Zero(c);
      l.residual_w = MatrixX<S>::Zero(c, c);
    }
    p.post_w = MatrixX<S>::Zero(1, cfg.n_layers() * c);
    p.post_b = MatrixX<S>::Zero(1, 1);
    return p;
  }

  /// Uniform +-sqrt(1/fan_in) init for every tensor of a layer.
  static GeneratorParams init(const GeneratorConfig& cfg, Rng& rng) {
    GeneratorParams p = zeros(cfg);
    const double conv_bound = std::sqrt(1.0 / (cfg.channels * cfg.kernel_size));
    const double res_bound = std::sqrt(1.0 / cfg.channels);
    const double post_bound = std::sqrt(1.0 / (cfg.n_layers() * cfg.channels));
    auto fill = [&rng](MatrixX<S>& m, double bound) {
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<S>(rng.uniform(-bound, bound));
    };
    auto fillv = [&rng](VectorX<S>& v, double bound) {
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<S>(rng.uniform(-bound, bound));
    };
    fill(p.input_w, 1.0);
    for (auto& l : p.layers) {
      for (auto& w : l.filter_w) fill(w, conv_bound);
      for (auto& w : l.gate_w) fill(w, conv_bound);
      fillv(l.filter_b, conv_bound);
      fillv(l.gate_b, conv_bound);
      fill(l.residual_w, res_bound);
    }
    fill(p.post_w, post_bound);
    fill(p.post_b, post_bound);
    return p;
  }

  std::vector<TensorView<S>> tensor_views() {
    std::vector<TensorView<S>> v;
    v.push_back({"input.w", input_w.data(), input_w.rows(), input_w.cols()});
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& lp = layers[l];
      const std::string prefix = "layer" + std::to_string(l) + ".";
      for (std::size_t j = 0; j < lp.filter_w.size(); ++j)
        v.push_back({prefix + "filter.w" + std::to_string(j), lp.filter_w[j].data(),
                     lp.filter_w[j].rows(), lp.filter_w[j].cols()});
      for (std::size_t j = 0; j < lp.gate_w.size(); ++j)
        v.push_back({prefix + "gate.w" + std::to_string(j), lp.gate_w[j].data(),
                     lp.gate_w[j].rows(), lp.gate_w[j].cols()});
      v.push_back({prefix + "filter.b", lp.filter_b.data(), lp.filter_b.size(), 1});
      v.push_back({prefix + "gate.b", lp.gate_b.data(), lp.gate_b.size(), 1});
      v.push_back({prefix + "residual.w", lp.residual_w.data(), lp.residual_w.rows(),
                   lp.residual_w.cols()});
    }
    v.push_back({"post.w", post_w.data(), post_w.rows(), post_w.cols()});
    v.push_back({"post.b", post_b.data(), post_b.rows(), post_b.cols()});
    return v;
  }

  bool all_finite() const {
    auto ok = [](const MatrixX<S>& m) { return m.allFinite(); };
    if (!ok(input_w) || !ok(post_w) || !ok(post_b)) return false;
    for (const auto& l : layers) {
      for (const auto& w : l.filter_w)
        if (!ok(w)) return false;
      for (const auto& w : l.gate_w)
        if (!ok(w)) return false;
      if (!l.filter_b.allFinite() || !l.gate_b.allFinite() || !ok(l.residual_w)) return false;
    }
    return true;
  }
};

/// tanh(filter) * sigmoid(gate), the WaveNet gating nonlinearity.
template <typename S>
inline S gated_activation(S filter_path, S gate_path) {
  return std::tanh(filter_path) * (S(1) / (S(1) + std::exp(-gate_path)));
}

namespace detail {

/// One gated dilated conv over a block of T columns of the extended
/// residual stream. ext holds at least (kernel-1)*dilation columns of
/// context before column `pos`. tf/sg/z receive tanh(f), sigmoid(g) and
/// their product. This kernel is shared verbatim by the offline and the
/// streaming paths so single-block streaming is bit-identical to offline.
template <typename S, typename ExtT, typename TfT, typename SgT, typename ZT>
void gated_conv_block(const GeneratorLayerParams<S>& lp, const ExtT& ext, Eigen::Index pos,
                      Eigen::Index t_cols, int dilation, TfT&& tf, SgT&& sg, ZT&& z) {
  const auto k = static_cast<int>(lp.filter_w.size());
  tf.noalias() = lp.filter_w[0] * ext.middleCols(pos, t_cols);
  sg.noalias() = lp.gate_w[0] * ext.middleCols(pos, t_cols);
  for (int j = 1; j < k; ++j) {
    tf.noalias() += lp.filter_w[static_cast<std::size_t>(j)] * ext.middleCols(pos - j * dilation, t_cols);
    sg.noalias() += lp.gate_w[static_cast<std::size_t>(j)] * ext.middleCols(pos - j * dilation, t_cols);
  }
  tf.colwise() += lp.filter_b;
  sg.colwise() += lp.gate_b;
  tf = tf.array().tanh().matrix();
  sg = (S(1) / (S(1) + (-sg.array()).exp())).matrix();
  z = tf.cwiseProduct(sg);
}

}  // namespace detail

/// Cached activations for generator_backward.
template <typename S>
struct GeneratorTape {
  GeneratorConfig config;
  Eigen::Index length = 0;
  ArrayX<S> input;
  std::vector<MatrixX<S>> ext;  // per layer: residual stream with zero left context
  std::vector<MatrixX<S>> tf, sg, z;
};

/// Offline forward pass: same-length output, causal via zero left padding.
template <typename S>
ArrayX<S> generator_forward(const ArrayX<S>& x, const GeneratorParams<S>& params,
                            const GeneratorConfig& config, GeneratorTape<S>* tape = nullptr) {
  config.validate();
  if (x.size() == 0) throw UsageError("generator_forward: empty input");
  if (!params.all_finite()) throw NumericalError("generator_forward: non-finite parameters");

  const Eigen::Index t_cols = x.size();
  const int n_layers = config.n_layers();
  const int c = config.channels;

  std::vector<MatrixX<S>> ext(static_cast<std::size_t>(n_layers));
  MatrixX<S> tf, sg;
  std::vector<MatrixX<S>> z(static_cast<std::size_t>(n_layers));
  if (tape) {
    tape->config = config;
    tape->length = t_cols;
    tape->input = x;
    tape->tf.resize(static_cast<std::size_t>(n_layers));
    tape->sg.resize(static_cast<std::size_t>(n_layers));
  }

  MatrixX<S> out = MatrixX<S>::Constant(1, t_cols, params.post_b(0, 0));
  for (int l = 0; l < n_layers; ++l) {
    const auto li = static_cast<std::size_t>(l);
    const int ctx = config.context(l);
    ext[li].resize(c, ctx + t_cols);
    ext[li].leftCols(ctx).setZero();
    if (l == 0) {
      ext[li].rightCols(t_cols).noalias() = params.input_w * x.matrix().transpose();
    } else {
      ext[li].rightCols(t_cols) = ext[li - 1].rightCols(t_cols);
      ext[li].rightCols(t_cols).noalias() += params.layers[li - 1].residual_w * z[li - 1];
    }
    tf.resize(c, t_cols);
    sg.resize(c, t_cols);
    z[li].resize(c, t_cols);
    detail::gated_conv_block(params.layers[li], ext[li], ctx, t_cols, config.dilation(l), tf, sg, z[li]);
    out.noalias() += params.post_w.middleCols(l * c, c) * z[li];
    if (tape) {
      tape->tf[li] = std::move(tf);
      tape->sg[li] = std::move(sg);
      tf = MatrixX<S>();
      sg = MatrixX<S>();
    }
    if (l > 0 && !tape) {  // free as we go; only needed again when taping
      ext[li - 1] = MatrixX<S>();
      z[li - 1] = MatrixX<S>();
    }
  }
  if (tape) {
    tape->ext = std::move(ext);
    tape->z = std::move(z);
  }
  return out.row(0).transpose().array();
}

template <typename S>
ArrayX<S> generator_forward(const AudioBuffer& x, const GeneratorParams<S>& params,
                            const GeneratorConfig& config, GeneratorTape<S>* tape = nullptr) {
  return generator_forward<S>(x.to_array<S>(), params, config, tape);
}

/// Reverse-mode gradients for every parameter tensor and the input signal.
/// Gradients accumulate into `grads` (zero-initialized if shapes differ),
/// so batched callers can sum per-segment contributions in place.
template <typename S>
ArrayX<S> generator_backward(const GeneratorTape<S>& tape, const GeneratorParams<S>& params,
                             const ArrayX<S>& upstream, GeneratorParams<S>& grads) {
  const auto& cfg = tape.config;
  const Eigen::Index t_cols = tape.length;
  if (upstream.size() != t_cols) throw UsageError("generator_backward: upstream length mismatch");
  const int n_layers = cfg.n_layers();
  const int c = cfg.channels;

  if (grads.layers.size() != params.layers.size() || grads.input_w.size() != params.input_w.size())
    grads = GeneratorParams<S>::zeros(cfg);
  const MatrixX<S> u = upstream.matrix().transpose();  // 1 x T

  grads.post_b(0, 0) += upstream.sum();
  MatrixX<S> d_res = MatrixX<S>::Zero(c, t_cols);  // dL/dr_{l+1}
  MatrixX<S> dz(c, t_cols), df(c, t_cols), dg(c, t_cols), d_prev(c, t_cols);
  for (int l = n_layers - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const int d = cfg.dilation(l);
    const int ctx = cfg.context(l);
    const auto& lp = params.layers[li];
    auto& lg = grads.layers[li];

    grads.post_w.middleCols(l * c, c).noalias() += u * tape.z[li].transpose();
    dz.noalias() = params.post_w.middleCols(l * c, c).transpose() * u;
    if (l + 1 < n_layers) {
      // r_{l+1} = r_l + residual_w * z_l
      lg.residual_w.noalias() += d_res * tape.z[li].transpose();
      dz.noalias() += lp.residual_w.transpose() * d_res;
    }

    const auto& tf = tape.tf[li];
    const auto& sg = tape.sg[li];
    df = dz.array() * sg.array() * (S(1) - tf.array().square());
    dg = dz.array() * tf.array() * sg.array() * (S(1) - sg.array());
    lg.filter_b += df.rowwise().sum();
    lg.gate_b += dg.rowwise().sum();

    // d_prev = identity skip + conv taps scattered back by their lag
    d_prev = d_res;
    const auto k = static_cast<int>(lp.filter_w.size());
    for (int j = 0; j < k; ++j) {
      const Eigen::Index lag = static_cast<Eigen::Index>(j) * d;
      const Eigen::Index span = t_cols - std::min<Eigen::Index>(lag, t_cols);
      lg.filter_w[static_cast<std::size_t>(j)].noalias() +=
          df * tape.ext[li].middleCols(ctx - lag, t_cols).transpose();
      lg.gate_w[static_cast<std::size_t>(j)].noalias() +=
          dg * tape.ext[li].middleCols(ctx - lag, t_cols).transpose();
      if (span > 0) {
        d_prev.leftCols(span).noalias() +=
            lp.filter_w[static_cast<std::size_t>(j)].transpose() * df.rightCols(span);
        d_prev.leftCols(span).noalias() +=
            lp.gate_w[static_cast<std::size_t>(j)].transpose() * dg.rightCols(span);
      }
    }
    std::swap(d_res, d_prev);
  }

  grads.input_w.noalias() += d_res * tape.input.matrix();
  ArrayX<S> dx = (params.input_w.transpose() * d_res).row(0).transpose().array();
  return dx;
}

}  // namespace retone
