#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace retone {

template <typename S>
using MatrixX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using VectorX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using ArrayX = Eigen::Array<S, Eigen::Dynamic, 1>;
template <typename S>
using ArrayXX = Eigen::Array<S, Eigen::Dynamic, Eigen::Dynamic>;

/// Named view over one parameter tensor; model parameter structs expose
/// their tensors in a fixed order shared by gradients, optimizer moments
/// and checkpoints.
template <typename S>
struct TensorView {
  std::string name;
  S* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const { return rows * cols; }
};

/// Mono sample sequence with its sample rate. Samples are nominally in
/// [-1, 1]; the WAV writer hard-clips anything outside.
struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = 0;

  AudioBuffer() = default;
  AudioBuffer(std::vector<float> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }

  template <typename S = float>
  ArrayX<S> to_array() const {
    ArrayX<S> a(static_cast<Eigen::Index>(samples.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = static_cast<S>(samples[static_cast<std::size_t>(i)]);
    return a;
  }

  template <typename S>
  static AudioBuffer from_array(const ArrayX<S>& a, int rate) {
    AudioBuffer b;
    b.sample_rate = rate;
    b.samples.resize(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) b.samples[static_cast<std::size_t>(i)] = static_cast<float>(a[i]);
    return b;
  }
};

}  // namespace retone
