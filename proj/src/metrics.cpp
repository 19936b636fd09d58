#include "fbpghi/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fbpghi {

namespace {

void require_same_shape(const Eigen::ArrayXXd& x, const Eigen::ArrayXXd& y, const char* what) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw ParameterError(std::string(what) + ": grids differ in shape");
}

}  // namespace

double spectral_difference(const MagnitudeGrid& reference, const MagnitudeGrid& estimate) {
  require_same_shape(reference, estimate, "spectral_difference");
  const double den = std::sqrt(reference.square().sum());
  if (!(den > 0)) throw DegenerateInputError("spectral_difference: zero reference");
  const double num = std::sqrt((reference - estimate).square().sum());
  if (num == 0.0) return -300.0;
  return std::max(-300.0, 20.0 * std::log10(num / den));
}

double spectral_difference(const ComplexGrid& reference, const ComplexGrid& estimate) {
  return spectral_difference(MagnitudeGrid(reference.abs()), MagnitudeGrid(estimate.abs()));
}

RealGrid phase_difference_map(const PhaseGrid& reference, const PhaseGrid& estimate) {
  require_same_shape(reference, estimate, "phase_difference_map");
  return principal_angle(reference - estimate) / constants::pi;
}

}  // namespace fbpghi
