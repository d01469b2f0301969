#pragma once

#include <string>
#include <vector>

#include "retone/spectrogram.hpp"
#include "retone/types.hpp"

namespace retone {

struct MetricsConfig {
  std::vector<int> fft_sizes = {64, 128, 256, 512, 1024, 2048};
  int mel_window = 1024;  // hop mel_window/4
  int n_mels = 160;
  double log_epsilon = 1e-5;
  double preemph_coeff = 0.85;
};

struct MetricValues {
  double e_ms = 0.0;
  double e_lms = 0.0;
  double e_mel = 0.0;
  double e_lmel = 0.0;
  double e_esr = 0.0;
};

struct ClipMetrics {
  std::string name;
  Eigen::Index length = 0;
  MetricValues values;
};

struct MetricReport {
  MetricValues aggregate;  // length-weighted mean of per-clip values
  std::vector<ClipMetrics> clips;
};

/// Mean over FFT sizes of the mean absolute magnitude-spectrogram
/// difference (hop N/4). Log variant takes ln(.+eps) first.
double multiscale_spectral_loss(const ArrayX<double>& output, const ArrayX<double>& target,
                                const std::vector<int>& fft_sizes, SpectrogramScale scale,
                                double log_epsilon = 1e-5);

/// Mean absolute difference of mel magnitude spectrograms.
double mel_l1_loss(const ArrayX<double>& output, const ArrayX<double>& target, int sample_rate,
                   SpectrogramScale scale, int n_mels = 160, int window = 1024,
                   double log_epsilon = 1e-5);

/// Error-to-signal ratio with pre-emphasis; same contract as the training
/// loss, also reported as a validation metric.
double esr_metric(const ArrayX<double>& output, const ArrayX<double>& target,
                  double preemph_coeff = 0.85);

MetricValues compute_metrics(const ArrayX<double>& output, const ArrayX<double>& target,
                             int sample_rate, const MetricsConfig& config);

MetricValues compute_metrics(const AudioBuffer& output, const AudioBuffer& target,
                             const MetricsConfig& config);

/// Length-weighted aggregation over clips.
MetricReport aggregate_metrics(std::vector<ClipMetrics> clips);

std::string metric_report_text(const MetricReport& report);
std::string metric_report_keyvalues(const MetricReport& report);

}  // namespace retone
