#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "retone/errors.hpp"
#include "retone/generator.hpp"
#include "retone/types.hpp"

namespace retone {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a fixed tensor-view order. Moment tensors are
/// created from the parameter views at construction and must be stepped
/// with views in the same order.
template <typename S>
class AdamState {
 public:
  AdamState() = default;

  AdamState(const std::vector<TensorView<S>>& params, AdamConfig config) : config_(config) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
      m_.push_back(VectorX<S>::Zero(p.size()));
      v_.push_back(VectorX<S>::Zero(p.size()));
    }
  }

  /// Applies one update. Returns false (and leaves everything untouched)
  /// when any gradient is non-finite.
  bool step(std::vector<TensorView<S>> params, const std::vector<TensorView<S>>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw UsageError("adam: tensor count mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
      if (grads[i].size() != m_[i].size()) throw UsageError("adam: tensor shape mismatch");
      if (!Eigen::Map<const VectorX<S>>(grads[i].data, grads[i].size()).allFinite()) return false;
    }

    ++step_;
    const S b1 = static_cast<S>(config_.beta1);
    const S b2 = static_cast<S>(config_.beta2);
    const S corr1 = S(1) - static_cast<S>(std::pow(config_.beta1, static_cast<double>(step_)));
    const S corr2 = S(1) - static_cast<S>(std::pow(config_.beta2, static_cast<double>(step_)));
    const S lr = static_cast<S>(config_.learning_rate);
    const S eps = static_cast<S>(config_.epsilon);

    for (std::size_t i = 0; i < params.size(); ++i) {
      Eigen::Map<VectorX<S>> p(params[i].data, params[i].size());
      Eigen::Map<const VectorX<S>> g(grads[i].data, grads[i].size());
      m_[i] = b1 * m_[i] + (S(1) - b1) * g;
      v_[i] = b2 * v_[i] + (S(1) - b2) * g.cwiseProduct(g);
      p.array() -=
          lr * (m_[i].array() / corr1) / ((v_[i].array() / corr2).sqrt() + eps);
    }
    return true;
  }

  std::uint64_t step_count() const { return step_; }
  void set_step_count(std::uint64_t s) { step_ = s; }
  const AdamConfig& config() const { return config_; }

  /// Views over the moment tensors for checkpointing; names follow the
  /// parameter views as adam.m.<name> / adam.v.<name>.
  std::vector<TensorView<S>> moment_views(const std::vector<TensorView<S>>& params) {
    if (params.size() != m_.size()) throw UsageError("adam: tensor count mismatch");
    std::vector<TensorView<S>> out;
    out.reserve(2 * params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
      out.push_back({"adam.m." + params[i].name, m_[i].data(), m_[i].size(), 1});
    for (std::size_t i = 0; i < params.size(); ++i)
      out.push_back({"adam.v." + params[i].name, v_[i].data(), v_[i].size(), 1});
    return out;
  }

 private:
  AdamConfig config_;
  std::vector<VectorX<S>> m_, v_;
  std::uint64_t step_ = 0;
};

}  // namespace retone
