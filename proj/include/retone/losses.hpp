#pragma once

#include <cmath>
#include <vector>

#include "retone/errors.hpp"
#include "retone/types.hpp"

namespace retone {

/// Discriminator hinge loss: mean over real of max(0, 1-s) plus mean over
/// fake of max(0, 1+s). Multi-scale callers pass all (segment, scale)
/// scores flattened; with equal counts per scale the mean over the list
/// equals the average over sub-discriminators.
template <typename S>
S hinge_loss_d(const std::vector<S>& real_scores, const std::vector<S>& fake_scores) {
  if (real_scores.empty() || fake_scores.empty())
    throw UsageError("hinge_loss_d: empty score list");
  S real_term = 0, fake_term = 0;
  for (S s : real_scores) real_term += std::max(S(0), S(1) - s);
  for (S s : fake_scores) fake_term += std::max(S(0), S(1) + s);
  return real_term / static_cast<S>(real_scores.size()) +
         fake_term / static_cast<S>(fake_scores.size());
}

/// d(hinge_loss_d)/d(score). Vanishes where the margin is satisfied.
template <typename S>
S hinge_loss_d_grad_real(S score, std::size_t n_real) {
  return score < S(1) ? S(-1) / static_cast<S>(n_real) : S(0);
}
template <typename S>
S hinge_loss_d_grad_fake(S score, std::size_t n_fake) {
  return score > S(-1) ? S(1) / static_cast<S>(n_fake) : S(0);
}

/// Generator hinge loss: -mean(fake scores).
template <typename S>
S hinge_loss_g(const std::vector<S>& fake_scores) {
  if (fake_scores.empty()) throw UsageError("hinge_loss_g: empty score list");
  S sum = 0;
  for (S s : fake_scores) sum += s;
  return -sum / static_cast<S>(fake_scores.size());
}

template <typename S>
S hinge_loss_g_grad(std::size_t n_fake) {
  return S(-1) / static_cast<S>(n_fake);
}

/// First-order high-pass pre-emphasis H(z) = 1 - c z^-1 (zero initial state).
template <typename S>
ArrayX<S> preemphasis(const ArrayX<S>& x, S coeff) {
  ArrayX<S> y(x.size());
  if (x.size() == 0) return y;
  y[0] = x[0];
  for (Eigen::Index t = 1; t < x.size(); ++t) y[t] = x[t] - coeff * x[t - 1];
  return y;
}

/// Error-to-signal ratio after pre-emphasis:
/// sum((H(target) - H(output))^2) / sum(H(target)^2).
template <typename S>
S esr_loss(const ArrayX<S>& output, const ArrayX<S>& target, S preemph_coeff) {
  if (output.size() != target.size()) throw UsageError("esr_loss: length mismatch");
  if (output.size() == 0) throw UsageError("esr_loss: empty signals");
  const ArrayX<S> ht = preemphasis(target, preemph_coeff);
  const ArrayX<S> ho = preemphasis(output, preemph_coeff);
  const S denom = ht.square().sum();
  if (!(denom > S(0))) throw DataError("esr_loss: target has zero energy after pre-emphasis");
  return (ht - ho).square().sum() / denom;
}

/// dL/doutput for esr_loss: the adjoint of H applied to -2e / sum(H(t)^2).
template <typename S>
ArrayX<S> esr_loss_backward(const ArrayX<S>& output, const ArrayX<S>& target, S preemph_coeff) {
  const ArrayX<S> ht = preemphasis(target, preemph_coeff);
  const ArrayX<S> ho = preemphasis(output, preemph_coeff);
  const S denom = ht.square().sum();
  if (!(denom > S(0))) throw DataError("esr_loss: target has zero energy after pre-emphasis");
  const ArrayX<S> de = S(-2) / denom * (ht - ho);
  // (H^T v)[t] = v[t] - c v[t+1]
  ArrayX<S> dx(output.size());
  const Eigen::Index n = output.size();
  for (Eigen::Index t = 0; t < n - 1; ++t) dx[t] = de[t] - preemph_coeff * de[t + 1];
  dx[n - 1] = de[n - 1];
  return dx;
}

}  // namespace retone
