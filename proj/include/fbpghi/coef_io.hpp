#pragma once

#include "fbpghi/core.hpp"
#include "fbpghi/scales.hpp"

#include <filesystem>
#include <optional>

namespace fbpghi {

/// Contents of a .fbc coefficient file:
///
///   "FBCOEF01" | uint64 header bytes | JSON header | N*K float64 magnitudes | [N*K float64 phases]
///
/// Numbers are little-endian and grids are stored frame by frame.
struct CoefficientFile {
  FilterBankSpec spec;
  Index length = 0;         ///< padded transform length L
  Index signal_length = 0;  ///< samples before zero padding
  MagnitudeGrid magnitude;
  std::optional<PhaseGrid> phase;
};

void write_coefficients(const std::filesystem::path& path, const CoefficientFile& file);

/// Throws DataError for a bad magic, header or size.
CoefficientFile read_coefficients(const std::filesystem::path& path);

}  // namespace fbpghi
