#pragma once

#include "fbpghi/core.hpp"

namespace fbpghi {

/// 20 log10(|| |c_ref| - |c_est| || / || c_ref ||) in dB, clamped below at -300 dB.
/// Throws DegenerateInputError for a zero reference.
double spectral_difference(const MagnitudeGrid& reference, const MagnitudeGrid& estimate);
double spectral_difference(const ComplexGrid& reference, const ComplexGrid& estimate);

/// principal_angle(reference - estimate) / pi per cell, in (-1, 1].
RealGrid phase_difference_map(const PhaseGrid& reference, const PhaseGrid& estimate);

}  // namespace fbpghi
