#pragma once

#include <cmath>

#include "retone/rng.hpp"
#include "retone/training.hpp"
#include "retone/types.hpp"

namespace retone::testsupport {

/// Synthetic guitar-ish material: decaying harmonic plucks at random
/// onsets and pitches over a soft noise floor. Deterministic per seed.
inline ArrayX<float> synth_plucks(double seconds, int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<Eigen::Index>(seconds * sample_rate);
  ArrayX<float> x = ArrayX<float>::Zero(n);
  const double note_every = 0.25;
  const auto n_notes = static_cast<int>(seconds / note_every);
  for (int k = 0; k < n_notes; ++k) {
    const auto onset = static_cast<Eigen::Index>((k * note_every + rng.uniform(0.0, 0.1)) *
                                                 sample_rate);
    const double f0 = rng.uniform(80.0, 400.0);
    const double amp = rng.uniform(0.1, 0.85);
    const double decay = rng.uniform(2.0, 8.0);
    const auto dur = static_cast<Eigen::Index>(0.6 * sample_rate);
    for (Eigen::Index i = 0; i < dur && onset + i < n; ++i) {
      const double t = static_cast<double>(i) / sample_rate;
      const double env = amp * std::exp(-decay * t);
      double v = 0.0;
      for (int h = 1; h <= 3; ++h)
        v += env / h * std::sin(2.0 * M_PI * f0 * h * t);
      x[onset + i] += static_cast<float>(v);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    x[i] += static_cast<float>(rng.uniform(-1e-3, 1e-3));
  // keep headroom
  const float peak = x.abs().maxCoeff();
  if (peak > 0.95f) x *= 0.95f / peak;
  return x;
}

inline ArrayX<float> tanh_drive(const ArrayX<float>& x, float drive = 3.0f) {
  return (drive * x).tanh() * 0.9f;
}

/// Paired store: consecutive segments of (x, tanh(3x)).
inline SegmentStore paired_tanh_store(double seconds, int sample_rate, double segment_seconds,
                                      std::uint64_t seed) {
  SegmentStore store;
  store.sample_rate = sample_rate;
  store.segment_length = static_cast<Eigen::Index>(segment_seconds * sample_rate);
  const ArrayX<float> x = synth_plucks(seconds, sample_rate, seed);
  const ArrayX<float> y = tanh_drive(x);
  for (Eigen::Index s = 0; s + store.segment_length <= x.size(); s += store.segment_length) {
    store.inputs.push_back(x.segment(s, store.segment_length));
    store.targets.push_back(y.segment(s, store.segment_length));
  }
  return store;
}

/// Unpaired store in the alternating style: even segments feed the input
/// domain (clean), odd segments the target domain (driven).
inline SegmentStore unpaired_tanh_store(double seconds, int sample_rate, double segment_seconds,
                                        std::uint64_t seed) {
  SegmentStore store;
  store.sample_rate = sample_rate;
  store.segment_length = static_cast<Eigen::Index>(segment_seconds * sample_rate);
  const ArrayX<float> x = synth_plucks(seconds, sample_rate, seed);
  const ArrayX<float> y = tanh_drive(x);
  std::size_t index = 0;
  for (Eigen::Index s = 0; s + store.segment_length <= x.size(); s += store.segment_length, ++index) {
    if (index % 2 == 0) {
      store.inputs.push_back(x.segment(s, store.segment_length));
    } else {
      store.targets.push_back(y.segment(s, store.segment_length));
    }
  }
  return store;
}

}  // namespace retone::testsupport
