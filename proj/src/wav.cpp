#include "fbpghi/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace fbpghi {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | std::uint32_t{p[1]} << 8 | std::uint32_t{p[2]} << 16 |
         std::uint32_t{p[3]} << 24;
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

double decode_sample(const unsigned char* p, const Format& f) {
  if (f.tag == kFormatFloat) {
    float v;
    std::uint32_t raw = read_u32(p);
    std::memcpy(&v, &raw, sizeof v);
    return v;
  }
  if (f.bits == 16) return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
  // 24-bit: sign-extend from bit 23.
  std::int32_t v = static_cast<std::int32_t>(p[0] | p[1] << 8 | p[2] << 16);
  if (v & 0x800000) v -= 0x1000000;
  return v / 8388608.0;
}

}  // namespace

RealSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), {}};
  const auto fail = [&](const std::string& why) -> DataError {
    return DataError(path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  Format fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t available = bytes.size() - pos - 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > available) throw fail("truncated fmt chunk");
      fmt.tag = read_u16(chunk + 8);
      fmt.channels = read_u16(chunk + 10);
      fmt.sample_rate = read_u32(chunk + 12);
      fmt.bits = read_u16(chunk + 22);
      if (fmt.tag == kFormatExtensible) {
        if (size < 40) throw fail("truncated extensible fmt chunk");
        fmt.tag = read_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      // Writers that stream sometimes leave the size unset; take what is there.
      data = chunk + 8;
      data_size = std::min(size, available);
      break;
    }
    if (size > available) throw fail("truncated chunk");
    pos += 8 + size + (size & 1);
  }
  if (!have_fmt) throw fail("missing fmt chunk");
  if (!data) throw fail("missing data chunk");

  const bool pcm = fmt.tag == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24);
  const bool flt = fmt.tag == kFormatFloat && fmt.bits == 32;
  if (!pcm && !flt)
    throw fail("unsupported encoding (tag " + std::to_string(fmt.tag) + ", " +
               std::to_string(fmt.bits) + " bits)");
  if (fmt.channels != 1 && fmt.channels != 2)
    throw fail("only mono or stereo files are supported");
  if (fmt.sample_rate == 0) throw fail("zero sample rate");

  const std::size_t width = fmt.bits / 8;
  const std::size_t frame = width * fmt.channels;
  const auto frames = static_cast<Index>(data_size / frame);
  if (frames == 0) throw fail("no samples");
  Eigen::ArrayXd samples(frames);
  for (Index i = 0; i < frames; ++i) {
    const unsigned char* p = data + static_cast<std::size_t>(i) * frame;
    double sum = 0.0;
    for (std::size_t c = 0; c < fmt.channels; ++c) sum += decode_sample(p + c * width, fmt);
    samples(i) = sum / fmt.channels;
  }
  if (fmt.channels == 2) warn(path.string() + ": stereo input averaged to mono");
  if (!samples.allFinite()) throw fail("non-finite samples");
  return RealSignal{samples, static_cast<double>(fmt.sample_rate)};
}

Index write_wav(const std::filesystem::path& path, const RealSignal& s, WavEncoding encoding) {
  validate(s);
  const double rounded_rate = std::round(s.sample_rate);
  if (rounded_rate < 1 || rounded_rate > 4294967295.0)
    throw ParameterError("write_wav: sample rate does not fit the header");

  const std::uint16_t bits = encoding == WavEncoding::pcm16 ? 16 : encoding == WavEncoding::pcm24 ? 24 : 32;
  const std::uint16_t tag = encoding == WavEncoding::float32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t width = bits / 8u;
  const auto data_size = static_cast<std::uint64_t>(s.length()) * width;
  if (data_size > 0xFFFFFFFFull - 36) throw ParameterError("write_wav: signal too long for RIFF");

  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put_u32(out, static_cast<std::uint32_t>(36 + data_size));
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(rounded_rate));
  put_u32(out, static_cast<std::uint32_t>(rounded_rate) * width);
  put_u16(out, static_cast<std::uint16_t>(width));
  put_u16(out, bits);
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(data_size));

  Index out_of_range = 0;
  for (Index i = 0; i < s.length(); ++i) {
    const double x = s.samples(i);
    if (std::abs(x) > 1.0) ++out_of_range;
    if (encoding == WavEncoding::float32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
      continue;
    }
    // Same 2^(bits-1) scale as the reader; +1.0 saturates at the largest code.
    const double scale = encoding == WavEncoding::pcm16 ? 32768.0 : 8388608.0;
    const auto q = static_cast<std::int32_t>(
        std::clamp(std::round(std::clamp(x, -1.0, 1.0) * scale), -scale, scale - 1.0));
    const auto u = static_cast<std::uint32_t>(q);
    out.push_back(static_cast<char>(u & 0xFF));
    out.push_back(static_cast<char>(u >> 8 & 0xFF));
    if (encoding == WavEncoding::pcm24) out.push_back(static_cast<char>(u >> 16 & 0xFF));
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("write failed: " + path.string());
  if (out_of_range > 0)
    warn(path.string() + ": " + std::to_string(out_of_range) + " samples outside [-1, 1]" +
         (encoding == WavEncoding::float32 ? " (stored unclipped)" : " (clipped)"));
  return out_of_range;
}

}  // namespace fbpghi
