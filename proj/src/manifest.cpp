#include <charconv>
#include <fstream>
#include <sstream>

#include "retone/dataset.hpp"
#include "retone/errors.hpp"

namespace retone {

namespace {

void append_records(std::string& out, const char* domain, const std::vector<SegmentRef>& segs) {
  for (const auto& s : segs) {
    out += domain;
    out += ' ';
    out += s.path;
    out += ' ';
    out += std::to_string(s.start);
    out += ' ';
    out += std::to_string(s.length);
    out += '\n';
  }
}

std::int64_t parse_int(const std::string& tok, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw DataError(std::string("manifest: bad ") + what + ": '" + tok + "'");
  return v;
}

}  // namespace

std::string manifest_to_text(const DatasetManifest& m) {
  std::string out = "sample_rate=" + std::to_string(m.sample_rate) + "\n";
  append_records(out, "input", m.input_segments);
  append_records(out, "target", m.target_segments);
  return out;
}

DatasetManifest manifest_from_text(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("sample_rate=", 0) != 0)
    throw DataError("manifest: missing sample_rate header");
  m.sample_rate = static_cast<int>(parse_int(line.substr(12), "sample_rate"));
  if (m.sample_rate <= 0) throw DataError("manifest: sample_rate must be positive");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Path may contain spaces: the record is <domain> <path...> <start> <len>,
    // so split off the first token and the last two.
    const auto d_end = line.find(' ');
    if (d_end == std::string::npos) throw DataError("manifest: malformed record: " + line);
    const std::string domain = line.substr(0, d_end);
    const auto len_pos = line.rfind(' ');
    const auto start_pos = line.rfind(' ', len_pos - 1);
    if (len_pos == std::string::npos || start_pos == std::string::npos || start_pos <= d_end)
      throw DataError("manifest: malformed record: " + line);

    SegmentRef seg;
    seg.path = line.substr(d_end + 1, start_pos - d_end - 1);
    seg.start = parse_int(line.substr(start_pos + 1, len_pos - start_pos - 1), "start");
    seg.length = parse_int(line.substr(len_pos + 1), "length");
    if (seg.path.empty() || seg.start < 0 || seg.length < 1)
      throw DataError("manifest: malformed record: " + line);
    if (m.segment_length_samples == 0) m.segment_length_samples = seg.length;
    if (seg.length != m.segment_length_samples)
      throw DataError("manifest: inconsistent segment length: " + line);

    if (domain == "input") {
      m.input_segments.push_back(std::move(seg));
    } else if (domain == "target") {
      m.target_segments.push_back(std::move(seg));
    } else {
      throw DataError("manifest: unknown domain '" + domain + "'");
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + path);
  const std::string text = manifest_to_text(m);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("manifest write failed: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open manifest: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return manifest_from_text(ss.str());
}

}  // namespace retone
