#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "retone/adam.hpp"
#include "retone/dataset.hpp"
#include "retone/discriminator.hpp"
#include "retone/errors.hpp"
#include "retone/generator.hpp"
#include "retone/losses.hpp"
#include "retone/metrics.hpp"
#include "retone/rng.hpp"
#include "retone/types.hpp"
#include "retone/wav.hpp"

namespace retone {

struct TrainConfig {
  int batch_size = 5;
  std::int64_t iterations = 1;
  int d_steps_per_g_step = 1;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double preemph_coeff = 0.85;
  std::uint64_t seed = 42;
  std::int64_t checkpoint_every = 5000;
  std::int64_t validate_every = 1000;
  bool mask_receptive_field = true;

  AdamConfig adam_for(double lr) const {
    AdamConfig a;
    a.learning_rate = lr;
    a.beta1 = adam_beta1;
    a.beta2 = adam_beta2;
    a.epsilon = adam_epsilon;
    return a;
  }
};

/// Segments resolved to audio, one vector per domain. For paired data the
/// two vectors line up index by index.
class SegmentStore {
 public:
  int sample_rate = 0;
  Eigen::Index segment_length = 0;
  std::vector<ArrayX<float>> inputs;
  std::vector<ArrayX<float>> targets;

  static SegmentStore from_manifest(const DatasetManifest& m, const std::string& root) {
    SegmentStore store;
    store.sample_rate = m.sample_rate;
    store.segment_length = m.segment_length_samples;
    std::map<std::string, AudioBuffer> cache;
    auto fetch = [&](const SegmentRef& seg) {
      auto it = cache.find(seg.path);
      if (it == cache.end()) {
        const std::string full = root.empty() ? seg.path : root + "/" + seg.path;
        it = cache.emplace(seg.path, load_audio(full)).first;
        if (it->second.sample_rate != m.sample_rate)
          throw DataError("manifest: sample rate mismatch in " + seg.path);
      }
      const auto& buf = it->second;
      if (seg.start < 0 || seg.start + seg.length > static_cast<std::int64_t>(buf.size()))
        throw DataError("manifest: segment outside file " + seg.path);
      ArrayX<float> a(seg.length);
      for (std::int64_t i = 0; i < seg.length; ++i)
        a[i] = buf.samples[static_cast<std::size_t>(seg.start + i)];
      return a;
    };
    for (const auto& seg : m.input_segments) store.inputs.push_back(fetch(seg));
    for (const auto& seg : m.target_segments) store.targets.push_back(fetch(seg));
    return store;
  }

  void require_paired() const {
    if (inputs.empty() || inputs.size() != targets.size())
      throw DataError("paired data required: input/target segment counts differ");
  }
  void require_unpaired() const {
    if (inputs.empty() || targets.empty())
      throw DataError("both domains need at least one segment");
  }
};

/// Draws `batch` indices uniformly (with replacement) from [0, n). The
/// training loops use exactly this routine, so sampling statistics can be
/// tested against it directly.
inline std::vector<std::size_t> sample_batch(Rng& rng, std::size_t n, int batch) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(batch));
  for (auto& i : idx) i = rng.index(n);
  return idx;
}

struct TrainHooks {
  /// Called once per iteration with (iter, loss_d, loss_g); supervised
  /// training reports (iter, esr_loss, 0).
  std::function<void(std::int64_t, double, double)> on_iteration;
  /// Optional; returns the model-selection metric for this iteration.
  std::function<double(std::int64_t)> validate;
  /// tag is "periodic", "best", "final" or "diagnostic".
  std::function<void(std::int64_t, const std::string&)> on_checkpoint;
  std::function<void(const std::string&)> on_warning;

  void warn(const std::string& msg) const {
    if (on_warning) on_warning(msg);
  }
  void checkpoint(std::int64_t iter, const std::string& tag) const {
    if (on_checkpoint) on_checkpoint(iter, tag);
  }
};

namespace detail {

template <typename S>
void accumulate_views(std::vector<TensorView<S>> dst, const std::vector<TensorView<S>>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    Eigen::Map<VectorX<S>> d(dst[i].data, dst[i].size());
    Eigen::Map<const VectorX<S>> s(src[i].data, src[i].size());
    d += s;
  }
}

template <typename S>
ArrayX<S> to_scalar(const ArrayX<float>& a) {
  if constexpr (std::is_same_v<S, float>) {
    return a;
  } else {
    return a.template cast<S>();
  }
}

/// Shared validation/checkpoint cadence; tracks the best selection metric.
struct Cadence {
  double best = std::numeric_limits<double>::infinity();

  template <typename Hooks>
  void run(std::int64_t iter, std::int64_t total, const TrainConfig& cfg, const Hooks& hooks) {
    if (hooks.validate && cfg.validate_every > 0 &&
        ((iter + 1) % cfg.validate_every == 0 || iter + 1 == total)) {
      const double metric = hooks.validate(iter);
      if (metric < best) {
        best = metric;
        hooks.checkpoint(iter, "best");
      }
    }
    if (cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0 && iter + 1 != total)
      hooks.checkpoint(iter, "periodic");
  }
};

}  // namespace detail

/// Alternating hinge-loss training: one batch of discriminator updates,
/// then one generator update through the frozen discriminator and the
/// spectral front end. Input and target segments are sampled independently
/// (unpaired, with replacement).
template <typename S>
void train_adversarial(const SegmentStore& data, const GeneratorConfig& gcfg,
                       GeneratorParams<S>& gen, const MultiScaleConfig& dcfg,
                       MultiScaleParams<S>& disc, const TrainConfig& cfg, AdamState<S>& opt_g,
                       AdamState<S>& opt_d, std::int64_t start_iteration,
                       const TrainHooks& hooks) {
  data.require_unpaired();
  dcfg.validate();
  const int sr = data.sample_rate;
  const auto n_subs = dcfg.subs.size();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t n_scores = batch * n_subs;

  MultiScaleParams<S> dgrads = MultiScaleParams<S>::zeros(dcfg);
  MultiScaleParams<S> dgrads_scratch = MultiScaleParams<S>::zeros(dcfg);
  GeneratorParams<S> ggrads = GeneratorParams<S>::zeros(gcfg);
  detail::Cadence cadence;

  for (std::int64_t iter = start_iteration; iter < cfg.iterations; ++iter) {
    Rng rng = Rng::for_iteration(cfg.seed, static_cast<std::uint64_t>(iter));
    double loss_d = 0.0;

    for (int dstep = 0; dstep < cfg.d_steps_per_g_step; ++dstep) {
      const auto x_idx = sample_batch(rng, data.inputs.size(), cfg.batch_size);
      const auto y_idx = sample_batch(rng, data.targets.size(), cfg.batch_size);

      for (auto& sub : dgrads.subs)
        for (auto& l : sub.layers) {
          l.dir.setZero();
          l.mag.setZero();
          l.bias.setZero();
        }

      const MultiScaleWeights<S> dw = multiscale_weights(disc);
      std::vector<S> real_scores, fake_scores;
      std::vector<DiscriminatorTape<S>> tapes;
      for (std::size_t b = 0; b < batch; ++b) {
        const ArrayX<S> y = detail::to_scalar<S>(data.targets[y_idx[b]]);
        const auto scores = multiscale_forward<S>(y, disc, dcfg, sr, &tapes, &dw);
        for (std::size_t k = 0; k < n_subs; ++k) {
          real_scores.push_back(scores[k]);
          const S u = hinge_loss_d_grad_real(scores[k], n_scores);
          if (u != S(0)) discriminator_backward(tapes[k], disc.subs[k], u, dgrads.subs[k]);
        }
      }
      for (std::size_t b = 0; b < batch; ++b) {
        const ArrayX<S> x = detail::to_scalar<S>(data.inputs[x_idx[b]]);
        const ArrayX<S> fake = generator_forward<S>(x, gen, gcfg);
        const auto scores = multiscale_forward<S>(fake, disc, dcfg, sr, &tapes, &dw);
        for (std::size_t k = 0; k < n_subs; ++k) {
          fake_scores.push_back(scores[k]);
          const S u = hinge_loss_d_grad_fake(scores[k], n_scores);
          if (u != S(0)) discriminator_backward(tapes[k], disc.subs[k], u, dgrads.subs[k]);
        }
      }
      loss_d = static_cast<double>(hinge_loss_d(real_scores, fake_scores));
      if (!std::isfinite(loss_d)) {
        hooks.checkpoint(iter, "diagnostic");
        throw NumericalError("adversarial training: non-finite discriminator loss at iteration " +
                             std::to_string(iter));
      }
      if (!opt_d.step(disc.tensor_views(), dgrads.tensor_views()))
        hooks.warn("iteration " + std::to_string(iter) +
                   ": non-finite discriminator gradients, update skipped");
    }

    // Generator step through the frozen discriminator.
    const auto x_idx = sample_batch(rng, data.inputs.size(), cfg.batch_size);
    for (auto v : ggrads.tensor_views()) Eigen::Map<VectorX<S>>(v.data, v.size()).setZero();
    const MultiScaleWeights<S> dw = multiscale_weights(disc);
    std::vector<S> g_scores;
    std::vector<DiscriminatorTape<S>> tapes;
    for (std::size_t b = 0; b < batch; ++b) {
      const ArrayX<S> x = detail::to_scalar<S>(data.inputs[x_idx[b]]);
      GeneratorTape<S> gtape;
      const ArrayX<S> fake = generator_forward<S>(x, gen, gcfg, &gtape);
      const auto scores = multiscale_forward<S>(fake, disc, dcfg, sr, &tapes, &dw);
      ArrayX<S> d_audio = ArrayX<S>::Zero(fake.size());
      for (std::size_t k = 0; k < n_subs; ++k) {
        g_scores.push_back(scores[k]);
        d_audio += discriminator_backward(tapes[k], disc.subs[k], hinge_loss_g_grad<S>(n_scores),
                                          dgrads_scratch.subs[k], /*param_grads=*/false);
      }
      generator_backward(gtape, gen, d_audio, ggrads);
    }
    const double loss_g = static_cast<double>(hinge_loss_g(g_scores));
    if (!std::isfinite(loss_g)) {
      hooks.checkpoint(iter, "diagnostic");
      throw NumericalError("adversarial training: non-finite generator loss at iteration " +
                           std::to_string(iter));
    }
    if (!opt_g.step(gen.tensor_views(), ggrads.tensor_views()))
      hooks.warn("iteration " + std::to_string(iter) +
                 ": non-finite generator gradients, update skipped");

    if (hooks.on_iteration) hooks.on_iteration(iter, loss_d, loss_g);
    cadence.run(iter, cfg.iterations, cfg, hooks);
  }
  hooks.checkpoint(cfg.iterations - 1, "final");
}

/// Supervised baseline: ESR loss with pre-emphasis over paired segments.
/// The first receptive_field-1 output samples of each segment are excluded
/// from the loss (the loss is evaluated on the sliced tails, so masked
/// target samples cannot influence it at all).
template <typename S>
void train_supervised(const SegmentStore& data, const GeneratorConfig& gcfg,
                      GeneratorParams<S>& gen, const TrainConfig& cfg, AdamState<S>& opt_g,
                      std::int64_t start_iteration, const TrainHooks& hooks) {
  data.require_paired();
  const Eigen::Index skip = cfg.mask_receptive_field ? receptive_field(gcfg) - 1 : 0;
  if (skip >= data.segment_length)
    throw UsageError("supervised training: segments shorter than the receptive field");
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const S preemph = static_cast<S>(cfg.preemph_coeff);

  GeneratorParams<S> ggrads = GeneratorParams<S>::zeros(gcfg);
  detail::Cadence cadence;

  for (std::int64_t iter = start_iteration; iter < cfg.iterations; ++iter) {
    Rng rng = Rng::for_iteration(cfg.seed, static_cast<std::uint64_t>(iter));
    const auto idx = sample_batch(rng, data.inputs.size(), cfg.batch_size);

    for (auto v : ggrads.tensor_views()) Eigen::Map<VectorX<S>>(v.data, v.size()).setZero();
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const ArrayX<S> x = detail::to_scalar<S>(data.inputs[idx[b]]);
      const ArrayX<S> target = detail::to_scalar<S>(data.targets[idx[b]]);
      GeneratorTape<S> gtape;
      const ArrayX<S> out = generator_forward<S>(x, gen, gcfg, &gtape);
      const Eigen::Index n = out.size() - skip;
      const ArrayX<S> out_tail = out.tail(n);
      const ArrayX<S> tgt_tail = target.tail(n);
      loss_sum += static_cast<double>(esr_loss<S>(out_tail, tgt_tail, preemph));
      ArrayX<S> dy = ArrayX<S>::Zero(out.size());
      dy.tail(n) = esr_loss_backward<S>(out_tail, tgt_tail, preemph) / static_cast<S>(batch);
      generator_backward(gtape, gen, dy, ggrads);
    }
    const double loss = loss_sum / static_cast<double>(batch);
    if (!std::isfinite(loss)) {
      hooks.checkpoint(iter, "diagnostic");
      throw NumericalError("supervised training: non-finite loss at iteration " +
                           std::to_string(iter));
    }
    if (!opt_g.step(gen.tensor_views(), ggrads.tensor_views()))
      hooks.warn("iteration " + std::to_string(iter) +
                 ": non-finite gradients, update skipped");

    if (hooks.on_iteration) hooks.on_iteration(iter, loss, 0.0);
    cadence.run(iter, cfg.iterations, cfg, hooks);
  }
  hooks.checkpoint(cfg.iterations - 1, "final");
}

/// Runs the generator over a paired validation set and reports all five
/// metrics, aggregated length-weighted.
template <typename S>
MetricReport validate_paired(const GeneratorConfig& gcfg, const GeneratorParams<S>& gen,
                             const SegmentStore& val, const MetricsConfig& mcfg) {
  val.require_paired();
  std::vector<ClipMetrics> clips;
  clips.reserve(val.inputs.size());
  for (std::size_t i = 0; i < val.inputs.size(); ++i) {
    const ArrayX<S> x = detail::to_scalar<S>(val.inputs[i]);
    const ArrayX<S> out = generator_forward<S>(x, gen, gcfg);
    ClipMetrics c;
    c.name = "segment" + std::to_string(i);
    c.length = out.size();
    c.values = compute_metrics(out.template cast<double>(), val.targets[i].cast<double>(),
                               val.sample_rate, mcfg);
    clips.push_back(std::move(c));
  }
  return aggregate_metrics(std::move(clips));
}

/// Model-selection metric matched to the discriminator input
/// representation; supervised runs select on ESR.
inline double selection_metric(const MetricValues& v, Representation rep) {
  switch (rep) {
    case Representation::spectrogram: return v.e_ms;
    case Representation::mel: return v.e_mel;
    case Representation::log_spectrogram: return v.e_lms;
    case Representation::log_mel: return v.e_lmel;
  }
  return v.e_lmel;
}

}  // namespace retone
