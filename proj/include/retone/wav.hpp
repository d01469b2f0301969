#pragma once

#include <cstddef>
#include <string>

#include "retone/types.hpp"

namespace retone {

/// Reads a PCM WAV file (16/24-bit integer or 32-bit float). Multichannel
/// audio is averaged down to mono; integer samples are scaled by 1/2^(bits-1).
/// Throws DataError on unreadable files, unsupported encodings, or
/// zero-length audio.
AudioBuffer load_audio(const std::string& path);

/// Writes a mono WAV file at the given bit depth (16, 24, or 32; 32 means
/// IEEE float). Samples outside [-1, 1] are hard-clipped; the clip count is
/// returned so callers can warn.
std::size_t save_audio(const AudioBuffer& buffer, const std::string& path, int bit_depth = 16);

}  // namespace retone
