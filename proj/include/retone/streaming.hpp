#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "retone/generator.hpp"
#include "retone/rng.hpp"
#include "retone/types.hpp"

namespace retone {

/// Real-time block inference for a trained generator. Each layer keeps a
/// sliding window of its input history sized (kernel-1)*dilation, so any
/// partition of the input into blocks reproduces the offline output.
///
/// All engine-owned buffers are sized at construction and never grow;
/// buffer_bytes() exposes that for tests. Eigen's matrix products use
/// short-lived internal packing scratch whose size depends only on the
/// block size, not on stream length.
class StreamState {
 public:
  StreamState(const GeneratorConfig& config, GeneratorParams<float> params, int max_block = 4096)
      : config_(config), params_(std::move(params)), max_block_(max_block > 0 ? max_block : 1) {
    config_.validate();
    if (!params_.all_finite()) throw NumericalError("stream: non-finite parameters");
    const int c = config_.channels;
    layers_.resize(static_cast<std::size_t>(config_.n_layers()));
    for (int l = 0; l < config_.n_layers(); ++l) {
      auto& st = layers_[static_cast<std::size_t>(l)];
      st.ctx = config_.context(l);
      st.dilation = config_.dilation(l);
      st.buf.resize(c, st.ctx + max_block_);
    }
    tf_.resize(c, max_block_);
    sg_.resize(c, max_block_);
    z_.resize(c, max_block_);
    out_row_.resize(1, max_block_);
    in_row_.resize(1, max_block_);
    reset();
  }

  /// Restores the post-construction state: history equals the offline
  /// zero left padding, so the next output matches offline from sample 0.
  void reset() {
    for (auto& st : layers_) {
      st.buf.setZero();
      st.pos = st.ctx;
    }
  }

  /// Processes n samples; any n, internally chunked to max_block.
  void process(const float* in, float* out, std::size_t n) {
    std::size_t done = 0;
    while (done < n) {
      const auto chunk = static_cast<Eigen::Index>(
          std::min<std::size_t>(n - done, static_cast<std::size_t>(max_block_)));
      process_block(in + done, out + done, chunk);
      done += static_cast<std::size_t>(chunk);
    }
  }

  ArrayX<float> process(const ArrayX<float>& block) {
    ArrayX<float> out(block.size());
    process(block.data(), out.data(), static_cast<std::size_t>(block.size()));
    return out;
  }

  /// Total engine-owned buffer footprint; constant across process calls.
  std::size_t buffer_bytes() const {
    std::size_t total = 0;
    auto count = [&total](const MatrixX<float>& m) {
      total += static_cast<std::size_t>(m.size()) * sizeof(float);
    };
    for (const auto& st : layers_) count(st.buf);
    count(tf_);
    count(sg_);
    count(z_);
    count(out_row_);
    count(in_row_);
    return total;
  }

  const GeneratorConfig& config() const { return config_; }
  const GeneratorParams<float>& params() const { return params_; }

 private:
  struct LayerState {
    MatrixX<float> buf;  // channels x (ctx + max_block)
    Eigen::Index pos = 0;
    int ctx = 0;
    int dilation = 1;
  };

  void process_block(const float* in, float* out, Eigen::Index t_cols) {
    const int c = config_.channels;
    in_row_.leftCols(t_cols) = Eigen::Map<const Eigen::Matrix<float, 1, Eigen::Dynamic>>(in, t_cols);
    out_row_.leftCols(t_cols).setConstant(params_.post_b(0, 0));

    auto tf = tf_.leftCols(t_cols);
    auto sg = sg_.leftCols(t_cols);
    auto z = z_.leftCols(t_cols);
    for (int l = 0; l < config_.n_layers(); ++l) {
      auto& st = layers_[static_cast<std::size_t>(l)];
      if (st.pos + t_cols > st.buf.cols()) compact(st);
      if (l == 0) {
        st.buf.middleCols(st.pos, t_cols).noalias() = params_.input_w * in_row_.leftCols(t_cols);
      } else {
        auto& prev = layers_[static_cast<std::size_t>(l - 1)];
        st.buf.middleCols(st.pos, t_cols) = prev.buf.middleCols(prev.pos, t_cols);
        st.buf.middleCols(st.pos, t_cols).noalias() +=
            params_.layers[static_cast<std::size_t>(l - 1)].residual_w * z;
      }
      detail::gated_conv_block(params_.layers[static_cast<std::size_t>(l)], st.buf, st.pos, t_cols,
                               st.dilation, tf, sg, z);
      out_row_.leftCols(t_cols).noalias() += params_.post_w.middleCols(l * c, c) * z;
    }
    for (auto& st : layers_) st.pos += t_cols;
    Eigen::Map<Eigen::Matrix<float, 1, Eigen::Dynamic>>(out, t_cols) = out_row_.leftCols(t_cols);
  }

  void compact(LayerState& st) {
    // Slide the live history window back to the front. In-place, column
    // order is increasing so the copy never reads overwritten data.
    const Eigen::Index src = st.pos - st.ctx;
    if (src <= 0) return;
    for (Eigen::Index i = 0; i < st.ctx; ++i) st.buf.col(i) = st.buf.col(src + i);
    st.pos = st.ctx;
  }

  GeneratorConfig config_;
  GeneratorParams<float> params_;
  int max_block_;
  std::vector<LayerState> layers_;
  MatrixX<float> tf_, sg_, z_, out_row_, in_row_;
};

struct BenchmarkResult {
  double realtime_factor = 0.0;
  double audio_seconds = 0.0;
  double wall_seconds = 0.0;
};

/// Streams seeded noise through the engine and reports
/// wall time / audio duration. Below 1.0 means faster than real time.
inline BenchmarkResult benchmark_realtime(const GeneratorParams<float>& params,
                                          const GeneratorConfig& config, double seconds,
                                          int block_size, int sample_rate = 44100,
                                          std::uint64_t seed = 1) {
  if (!(seconds > 0.0)) throw UsageError("benchmark: seconds must be > 0");
  if (block_size < 1) throw UsageError("benchmark: block_size must be >= 1");

  Rng rng(seed);
  const auto n_blocks = static_cast<std::int64_t>(seconds * sample_rate / block_size) + 1;
  ArrayX<float> in(block_size), out(block_size);
  for (Eigen::Index i = 0; i < in.size(); ++i) in[i] = static_cast<float>(rng.uniform(-0.5, 0.5));

  StreamState state(config, params, block_size);
  for (int warm = 0; warm < 4; ++warm)
    state.process(in.data(), out.data(), static_cast<std::size_t>(block_size));
  state.reset();

  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t b = 0; b < n_blocks; ++b)
    state.process(in.data(), out.data(), static_cast<std::size_t>(block_size));
  const auto stop = std::chrono::steady_clock::now();

  BenchmarkResult r;
  r.wall_seconds = std::chrono::duration<double>(stop - start).count();
  r.audio_seconds = static_cast<double>(n_blocks) * block_size / sample_rate;
  r.realtime_factor = r.wall_seconds / r.audio_seconds;
  return r;
}

}  // namespace retone
