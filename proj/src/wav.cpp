#include "retone/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "retone/errors.hpp"

namespace retone {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

AudioBuffer load_audio(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (raw.size() < 12 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_bytes = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= raw.size()) {
    const std::uint8_t* hdr = raw.data() + pos;
    std::uint32_t chunk_size = read_u32(hdr + 4);
    std::size_t body = pos + 8;
    if (body + chunk_size > raw.size()) chunk_size = static_cast<std::uint32_t>(raw.size() - body);
    if (std::memcmp(hdr, "fmt ", 4) == 0 && chunk_size >= 16) {
      format = read_u16(raw.data() + body);
      channels = read_u16(raw.data() + body + 2);
      rate = read_u32(raw.data() + body + 4);
      bits = read_u16(raw.data() + body + 14);
      if (format == kFormatExtensible && chunk_size >= 40) {
        // SubFormat GUID starts with the base format tag
        format = read_u16(raw.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = raw.data() + body;
      data_bytes = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) throw DataError("missing fmt/data chunk: " + path);
  if (channels == 0 || rate == 0) throw DataError("malformed fmt chunk: " + path);
  const bool is_float = format == kFormatFloat;
  if (!(format == kFormatPcm || is_float)) throw DataError("unsupported WAV format tag: " + path);
  if (is_float ? bits != 32 : (bits != 16 && bits != 24))
    throw DataError("unsupported bit depth (" + std::to_string(bits) + "): " + path);

  const std::size_t bytes_per_sample = bits / 8u;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_bytes / frame_bytes;
  if (frames == 0) throw DataError("zero-length audio: " + path);

  AudioBuffer out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(frames);
  const double inv_channels = 1.0 / channels;
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    const std::uint8_t* p = data + f * frame_bytes;
    for (std::uint16_t c = 0; c < channels; ++c, p += bytes_per_sample) {
      if (is_float) {
        std::uint32_t u = read_u32(p);
        acc += std::bit_cast<float>(u);
      } else if (bits == 16) {
        auto v = static_cast<std::int16_t>(read_u16(p));
        acc += v / 32768.0;
      } else {  // 24-bit
        std::int32_t v = p[0] | p[1] << 8 | p[2] << 16;
        if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
        acc += v / 8388608.0;
      }
    }
    out.samples[f] = static_cast<float>(acc * inv_channels);
  }
  return out;
}

std::size_t save_audio(const AudioBuffer& buffer, const std::string& path, int bit_depth) {
  if (buffer.empty()) throw DataError("refusing to write empty buffer: " + path);
  if (buffer.sample_rate <= 0) throw DataError("invalid sample rate");
  if (bit_depth != 16 && bit_depth != 24 && bit_depth != 32)
    throw UsageError("bit depth must be 16, 24 or 32");

  const bool is_float = bit_depth == 32;
  const std::size_t n = buffer.size();
  const std::size_t bytes_per_sample = static_cast<std::size_t>(bit_depth) / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(n * bytes_per_sample);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, is_float ? kFormatFloat : kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(buffer.sample_rate * bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  put_u16(out, static_cast<std::uint16_t>(bit_depth));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);

  std::size_t clipped = 0;
  for (float s : buffer.samples) {
    float v = s;
    if (v > 1.0f || v < -1.0f) {
      v = std::clamp(v, -1.0f, 1.0f);
      ++clipped;
    }
    if (is_float) {
      put_u32(out, std::bit_cast<std::uint32_t>(v));
    } else if (bit_depth == 16) {
      long q = std::lround(static_cast<double>(v) * 32768.0);
      q = std::clamp(q, -32768l, 32767l);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      long q = std::lround(static_cast<double>(v) * 8388608.0);
      q = std::clamp(q, -8388608l, 8388607l);
      auto u = static_cast<std::uint32_t>(static_cast<std::int32_t>(q));
      out.push_back(static_cast<std::uint8_t>(u));
      out.push_back(static_cast<std::uint8_t>(u >> 8));
      out.push_back(static_cast<std::uint8_t>(u >> 16));
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("write failed: " + path);
  return clipped;
}

}  // namespace retone
