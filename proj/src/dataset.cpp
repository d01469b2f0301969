#include "retone/dataset.hpp"

#include <cmath>
#include <cstdint>

#include "retone/errors.hpp"

namespace retone {

TrimSpan trim_silence_span(const AudioBuffer& buffer, double threshold_db, double window_ms) {
  if (buffer.empty()) throw DataError("trim_silence: empty buffer");
  if (!(threshold_db < 0.0)) throw UsageError("trim_silence: threshold_db must be < 0");
  if (!(window_ms > 0.0)) throw UsageError("trim_silence: window_ms must be > 0");

  const auto n = static_cast<std::int64_t>(buffer.size());
  auto window = static_cast<std::int64_t>(std::llround(window_ms * 1e-3 * buffer.sample_rate));
  if (window < 1) window = 1;
  const double threshold_rms = std::pow(10.0, threshold_db / 20.0);

  std::int64_t first_active = -1, last_active = -1;
  for (std::int64_t w = 0; w * window < n; ++w) {
    const std::int64_t begin = w * window;
    const std::int64_t end = std::min(begin + window, n);
    double energy = 0.0;
    for (std::int64_t i = begin; i < end; ++i) {
      const double s = buffer.samples[static_cast<std::size_t>(i)];
      energy += s * s;
    }
    const double rms = std::sqrt(energy / static_cast<double>(end - begin));
    if (rms > threshold_rms) {
      if (first_active < 0) first_active = w;
      last_active = w;
    }
  }
  if (first_active < 0) throw DataError("trim_silence: buffer is entirely silent");
  return TrimSpan{first_active * window, std::min((last_active + 1) * window, n)};
}

AudioBuffer trim_silence(const AudioBuffer& buffer, double threshold_db, double window_ms) {
  const TrimSpan span = trim_silence_span(buffer, threshold_db, window_ms);
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.assign(buffer.samples.begin() + span.begin, buffer.samples.begin() + span.end);
  return out;
}

double detect_clipping(const AudioBuffer& buffer, double level, int min_run) {
  if (!(level > 0.0 && level <= 1.0)) throw UsageError("detect_clipping: level must be in (0, 1]");
  if (min_run < 1) throw UsageError("detect_clipping: min_run must be >= 1");
  if (buffer.empty()) return 0.0;

  std::int64_t clipped = 0, run = 0;
  for (float s : buffer.samples) {
    if (std::fabs(static_cast<double>(s)) >= level) {
      ++run;
    } else {
      if (run >= min_run) clipped += run;
      run = 0;
    }
  }
  if (run >= min_run) clipped += run;
  return static_cast<double>(clipped) / static_cast<double>(buffer.size());
}

namespace {

std::int64_t segment_samples(double segment_seconds, int sample_rate) {
  auto len = static_cast<std::int64_t>(std::llround(segment_seconds * sample_rate));
  if (len < 1) throw UsageError("segment length must be at least one sample");
  return len;
}

std::vector<SegmentRef> enumerate_segments(const SourceFile& f, std::int64_t seg_len) {
  std::vector<SegmentRef> out;
  const std::int64_t begin = f.span_begin();
  const std::int64_t end = f.span_end();
  if (begin < 0 || end > f.length || begin > end)
    throw DataError("usable span outside file: " + f.path);
  for (std::int64_t s = begin; s + seg_len <= end; s += seg_len)
    out.push_back(SegmentRef{f.path, s, seg_len});
  return out;
}

}  // namespace

DatasetManifest build_unpaired_manifest(const std::vector<SourceFile>& files_x,
                                        const std::vector<SourceFile>& files_y,
                                        double segment_seconds, int sample_rate) {
  if (files_x.empty() || files_y.empty())
    throw UsageError("build_unpaired_manifest: both domains need at least one file");
  DatasetManifest m;
  m.sample_rate = sample_rate;
  m.segment_length_samples = segment_samples(segment_seconds, sample_rate);
  for (const auto& f : files_x) {
    auto segs = enumerate_segments(f, m.segment_length_samples);
    m.input_segments.insert(m.input_segments.end(), segs.begin(), segs.end());
  }
  for (const auto& f : files_y) {
    auto segs = enumerate_segments(f, m.segment_length_samples);
    m.target_segments.insert(m.target_segments.end(), segs.begin(), segs.end());
  }
  if (m.input_segments.empty()) throw DataError("input domain ended up empty");
  if (m.target_segments.empty()) throw DataError("target domain ended up empty");
  return m;
}

DatasetManifest build_alternating_manifest(const std::vector<SourceFile>& files,
                                           double segment_seconds, int sample_rate) {
  if (files.empty()) throw UsageError("build_alternating_manifest: no files");
  DatasetManifest m;
  m.sample_rate = sample_rate;
  m.segment_length_samples = segment_samples(segment_seconds, sample_rate);
  std::size_t index = 0;
  for (const auto& f : files) {
    for (auto& seg : enumerate_segments(f, m.segment_length_samples)) {
      (index % 2 == 0 ? m.input_segments : m.target_segments).push_back(seg);
      ++index;
    }
  }
  if (m.input_segments.empty()) throw DataError("input domain ended up empty");
  if (m.target_segments.empty()) throw DataError("target domain ended up empty");
  return m;
}

}  // namespace retone
