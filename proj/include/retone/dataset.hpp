#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "retone/types.hpp"

namespace retone {

/// One audio file available for segmentation: identified by a relative
/// path, with the usable span [usable_start, usable_end) selected by the
/// preprocessing policy (whole file by default).
struct SourceFile {
  std::string path;
  std::int64_t length = 0;
  std::int64_t usable_start = 0;
  std::int64_t usable_end = 0;  // 0 means "until end of file"

  std::int64_t span_begin() const { return usable_start; }
  std::int64_t span_end() const { return usable_end > 0 ? usable_end : length; }
};

struct SegmentRef {
  std::string path;
  std::int64_t start = 0;
  std::int64_t length = 0;

  friend bool operator==(const SegmentRef&, const SegmentRef&) = default;
};

/// Lists of fixed-length segments assigned to the input domain X and the
/// target domain Y. Segments are (file, offset) references, not copies.
struct DatasetManifest {
  int sample_rate = 0;
  std::int64_t segment_length_samples = 0;
  std::vector<SegmentRef> input_segments;
  std::vector<SegmentRef> target_segments;
};

/// Window-aligned span [begin, end) from the first to the last window
/// whose RMS exceeds threshold_db relative to full scale.
struct TrimSpan {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

/// Computes the silence-trim span without copying audio. Throws DataError
/// when the whole buffer is below the threshold.
TrimSpan trim_silence_span(const AudioBuffer& buffer, double threshold_db, double window_ms);

/// Returns the sub-buffer over trim_silence_span. Idempotent.
AudioBuffer trim_silence(const AudioBuffer& buffer, double threshold_db = -60.0,
                         double window_ms = 10.0);

/// Fraction of samples that belong to runs of at least min_run consecutive
/// samples with |s| >= level. Empty buffer gives 0.
double detect_clipping(const AudioBuffer& buffer, double level = 0.999, int min_run = 3);

/// Consecutive non-overlapping segments from files_x fill the input domain
/// and from files_y the target domain. Trailing partial segments drop.
DatasetManifest build_unpaired_manifest(const std::vector<SourceFile>& files_x,
                                        const std::vector<SourceFile>& files_y,
                                        double segment_seconds, int sample_rate);

/// The global segment sequence (file order, then time order) alternates:
/// even indices to the input domain, odd to the target domain.
DatasetManifest build_alternating_manifest(const std::vector<SourceFile>& files,
                                           double segment_seconds, int sample_rate);

/// Line-oriented manifest text format:
///   sample_rate=<int>
///   <domain> <relative path> <start sample> <length samples>
std::string manifest_to_text(const DatasetManifest& m);
DatasetManifest manifest_from_text(const std::string& text);
void save_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

}  // namespace retone
