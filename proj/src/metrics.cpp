#include "retone/metrics.hpp"

#include <cmath>
#include <sstream>

#include "retone/errors.hpp"
#include "retone/losses.hpp"

namespace retone {

namespace {

double spectrogram_l1(const MatrixX<double>& a, const MatrixX<double>& b) {
  return (a - b).cwiseAbs().mean();
}

}  // namespace

double multiscale_spectral_loss(const ArrayX<double>& output, const ArrayX<double>& target,
                                const std::vector<int>& fft_sizes, SpectrogramScale scale,
                                double log_epsilon) {
  if (output.size() != target.size()) throw UsageError("spectral loss: length mismatch");
  if (fft_sizes.empty()) throw UsageError("spectral loss: no FFT sizes");
  double total = 0.0;
  for (int n : fft_sizes) {
    SpectrogramConfig cfg = SpectrogramConfig::with_default_hop(n);
    cfg.log_epsilon = log_epsilon;
    Spectrogram<double> so = stft_magnitude<double>(output, cfg);
    Spectrogram<double> st = stft_magnitude<double>(target, cfg);
    if (scale == SpectrogramScale::log) {
      so = apply_scale(so, SpectrogramScale::log, log_epsilon);
      st = apply_scale(st, SpectrogramScale::log, log_epsilon);
    }
    total += spectrogram_l1(so.values, st.values);
  }
  return total / static_cast<double>(fft_sizes.size());
}

double mel_l1_loss(const ArrayX<double>& output, const ArrayX<double>& target, int sample_rate,
                   SpectrogramScale scale, int n_mels, int window, double log_epsilon) {
  if (output.size() != target.size()) throw UsageError("mel loss: length mismatch");
  SpectrogramConfig cfg = SpectrogramConfig::with_default_hop(window);
  cfg.log_epsilon = log_epsilon;
  MelConfig mel;
  mel.n_mels = n_mels;
  cfg.mel = mel;
  if (scale == SpectrogramScale::log) cfg.scale = SpectrogramScale::log;
  const MatrixX<double> mo = frontend_forward<double>(output, cfg, sample_rate);
  const MatrixX<double> mt = frontend_forward<double>(target, cfg, sample_rate);
  return spectrogram_l1(mo, mt);
}

double esr_metric(const ArrayX<double>& output, const ArrayX<double>& target,
                  double preemph_coeff) {
  return esr_loss<double>(output, target, preemph_coeff);
}

MetricValues compute_metrics(const ArrayX<double>& output, const ArrayX<double>& target,
                             int sample_rate, const MetricsConfig& config) {
  MetricValues v;
  v.e_ms = multiscale_spectral_loss(output, target, config.fft_sizes, SpectrogramScale::linear,
                                    config.log_epsilon);
  v.e_lms = multiscale_spectral_loss(output, target, config.fft_sizes, SpectrogramScale::log,
                                     config.log_epsilon);
  v.e_mel = mel_l1_loss(output, target, sample_rate, SpectrogramScale::linear, config.n_mels,
                        config.mel_window, config.log_epsilon);
  v.e_lmel = mel_l1_loss(output, target, sample_rate, SpectrogramScale::log, config.n_mels,
                         config.mel_window, config.log_epsilon);
  v.e_esr = esr_metric(output, target, config.preemph_coeff);
  return v;
}

MetricValues compute_metrics(const AudioBuffer& output, const AudioBuffer& target,
                             const MetricsConfig& config) {
  if (output.sample_rate != target.sample_rate) throw DataError("metrics: sample rate mismatch");
  return compute_metrics(output.to_array<double>(), target.to_array<double>(),
                         output.sample_rate, config);
}

MetricReport aggregate_metrics(std::vector<ClipMetrics> clips) {
  MetricReport report;
  report.clips = std::move(clips);
  double total_len = 0.0;
  for (const auto& c : report.clips) total_len += static_cast<double>(c.length);
  if (total_len <= 0.0) return report;
  for (const auto& c : report.clips) {
    const double w = static_cast<double>(c.length) / total_len;
    report.aggregate.e_ms += w * c.values.e_ms;
    report.aggregate.e_lms += w * c.values.e_lms;
    report.aggregate.e_mel += w * c.values.e_mel;
    report.aggregate.e_lmel += w * c.values.e_lmel;
    report.aggregate.e_esr += w * c.values.e_esr;
  }
  return report;
}

namespace {

void print_values(std::ostringstream& out, const MetricValues& v) {
  out << "e_ms=" << v.e_ms << " e_lms=" << v.e_lms << " e_mel=" << v.e_mel
      << " e_lmel=" << v.e_lmel << " e_esr=" << v.e_esr;
}

}  // namespace

std::string metric_report_text(const MetricReport& report) {
  std::ostringstream out;
  out.precision(6);
  for (const auto& c : report.clips) {
    out << c.name << " (" << c.length << " samples): ";
    print_values(out, c.values);
    out << "\n";
  }
  out << "aggregate: ";
  print_values(out, report.aggregate);
  out << "\n";
  return out.str();
}

std::string metric_report_keyvalues(const MetricReport& report) {
  std::ostringstream out;
  out.precision(10);
  out << "e_ms = " << report.aggregate.e_ms << "\n";
  out << "e_lms = " << report.aggregate.e_lms << "\n";
  out << "e_mel = " << report.aggregate.e_mel << "\n";
  out << "e_lmel = " << report.aggregate.e_lmel << "\n";
  out << "e_esr = " << report.aggregate.e_esr << "\n";
  return out.str();
}

}  // namespace retone
