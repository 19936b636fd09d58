#pragma once

#include "fbpghi/core.hpp"

#include <filesystem>

namespace fbpghi {

enum class WavEncoding { pcm16, pcm24, float32 };

/// Reads 16/24-bit PCM or 32-bit float RIFF/WAVE. Stereo is averaged to mono
/// with a warning; malformed files or other layouts throw DataError.
RealSignal read_wav(const std::filesystem::path& path);

/// Writes a mono file. Samples outside [-1, 1] are counted and reported
/// through warn(); PCM encodings clip them, float32 stores them unchanged.
/// Returns the number of such samples.
Index write_wav(const std::filesystem::path& path, const RealSignal& s,
                WavEncoding encoding = WavEncoding::float32);

}  // namespace fbpghi
