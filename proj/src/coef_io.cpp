#include "fbpghi/coef_io.hpp"

#include "spec_json.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace fbpghi {

namespace {

constexpr char kMagic[] = "FBCOEF01";
constexpr std::size_t kMagicSize = 8;

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i) & 0xFF));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = v << 8 | p[i];
  return v;
}

void put_grid(std::string& out, const Eigen::ArrayXXd& grid) {
  for (Index n = 0; n < grid.rows(); ++n)
    for (Index k = 0; k < grid.cols(); ++k) put_u64(out, std::bit_cast<std::uint64_t>(grid(n, k)));
}

Eigen::ArrayXXd get_grid(const unsigned char* p, Index rows, Index cols) {
  Eigen::ArrayXXd grid(rows, cols);
  for (Index n = 0; n < rows; ++n)
    for (Index k = 0; k < cols; ++k, p += 8) grid(n, k) = std::bit_cast<double>(get_u64(p));
  return grid;
}

}  // namespace

void write_coefficients(const std::filesystem::path& path, const CoefficientFile& file) {
  validate(file.spec);
  validate_magnitude(file.magnitude);
  if (file.phase && (file.phase->rows() != file.magnitude.rows() ||
                     file.phase->cols() != file.magnitude.cols()))
    throw ParameterError("write_coefficients: phase and magnitude dimensions differ");
  if (file.length < 1 || file.signal_length < 0 || file.signal_length > file.length)
    throw ParameterError("write_coefficients: invalid lengths");

  const detail::Json header{{"frames", file.magnitude.rows()},
                            {"channels", file.magnitude.cols()},
                            {"length", file.length},
                            {"signal_length", file.signal_length},
                            {"has_phase", file.phase.has_value()},
                            {"filterbank", detail::to_json(file.spec)}};
  const std::string text = header.dump();

  std::string out(kMagic, kMagicSize);
  put_u64(out, text.size());
  out += text;
  put_grid(out, file.magnitude);
  if (file.phase) put_grid(out, *file.phase);

  std::ofstream stream(path, std::ios::binary);
  if (!stream) throw DataError("cannot write " + path.string());
  stream.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!stream) throw DataError("write failed: " + path.string());
}

CoefficientFile read_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), {}};
  const auto fail = [&](const std::string& why) { return DataError(path.string() + ": " + why); };

  if (bytes.size() < kMagicSize + 8 || std::memcmp(bytes.data(), kMagic, kMagicSize) != 0)
    throw fail("not a coefficient file");
  const std::uint64_t header_size = get_u64(bytes.data() + kMagicSize);
  const std::size_t body = kMagicSize + 8;
  if (header_size > bytes.size() - body) throw fail("truncated header");

  CoefficientFile file;
  Index frames = 0, channels = 0;
  bool has_phase = false;
  try {
    const auto header = detail::Json::parse(bytes.begin() + body, bytes.begin() + body + header_size);
    detail::reject_unknown_keys(header,
                                {"frames", "channels", "length", "signal_length", "has_phase", "filterbank"},
                                "coefficient header");
    frames = header.at("frames").get<Index>();
    channels = header.at("channels").get<Index>();
    file.length = header.at("length").get<Index>();
    file.signal_length = header.at("signal_length").get<Index>();
    has_phase = header.at("has_phase").get<bool>();
    file.spec = detail::filterbank_from_json(header.at("filterbank"), {}, "coefficient header filterbank");
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("bad header: ") + e.what());
  }
  try {
    validate(file.spec);
  } catch (const ConfigurationError& e) {
    throw fail(e.what());
  }
  if (frames < 1 || channels < 1 || file.length < 1 || file.signal_length < 0 ||
      file.signal_length > file.length || file.length != frames * file.spec.decimation)
    throw fail("inconsistent dimensions in header");

  const std::size_t grid_bytes = static_cast<std::size_t>(frames * channels) * 8;
  const std::size_t expected = body + header_size + grid_bytes * (has_phase ? 2 : 1);
  if (bytes.size() != expected) throw fail("size does not match header");

  const unsigned char* p = bytes.data() + body + header_size;
  file.magnitude = get_grid(p, frames, channels);
  if (has_phase) file.phase = get_grid(p + grid_bytes, frames, channels);
  if (!file.magnitude.allFinite() || (file.magnitude < 0).any())
    throw fail("magnitudes must be finite and nonnegative");
  if (file.phase && !file.phase->allFinite()) throw fail("non-finite phases");
  return file;
}

}  // namespace fbpghi
