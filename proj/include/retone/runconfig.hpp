#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "retone/discriminator.hpp"
#include "retone/generator.hpp"
#include "retone/metrics.hpp"

namespace retone {

/// Flat key = value run configuration. Every knob across the modules lives
/// here with a default; unknown keys are rejected; '#' starts a comment.
struct RunConfig {
  // randomness
  std::uint64_t seed = 42;
  // preprocessing
  double trim_threshold_db = -60.0;
  double trim_window_ms = 10.0;
  double clip_level = 0.999;
  int clip_min_run = 3;
  double clip_max_ratio = 0.01;
  double segment_seconds = 2.0;
  // generator
  int gen_stacks = 2;
  int gen_layers_per_stack = 9;
  int gen_kernel_size = 3;
  int gen_dilation_growth = 2;
  int gen_channels = 16;
  // discriminator front end
  std::string disc_input = "log-mel";  // spect | mel | log-spect | log-mel
  int disc_scales = 3;                 // 1 or 3
  int disc_window = 1024;              // single-scale window size
  int mel_bands = 160;
  double log_epsilon = 1e-5;
  // training
  std::string train_mode = "adversarial";  // adversarial | supervised
  int batch_size = 5;
  std::int64_t iterations = 10000;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int d_steps_per_g_step = 1;
  double preemph_coeff = 0.85;
  std::int64_t checkpoint_every = 5000;
  std::int64_t validate_every = 1000;
  int mask_receptive_field = 1;
  int tiny = 0;  // shrink both nets for smoke runs
  // metrics
  std::string metric_fft_sizes = "64,128,256,512,1024,2048";

  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_text() const;
  void save(const std::string& path) const;

  /// One line per key: name, default, description. Backs --help.
  static std::string help_text();
  static std::vector<std::string> key_names();

  // Derived module configurations.
  GeneratorConfig generator_config() const;
  Representation representation() const;
  MultiScaleConfig discriminator_config() const;
  MetricsConfig metrics_config() const;
  std::vector<int> parsed_fft_sizes() const;

  void validate() const;
};

}  // namespace retone
