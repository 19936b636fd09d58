#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fbpghi {

using Index = Eigen::Index;
using Complex = std::complex<double>;

/// N x K grids: rows are time frames n, columns are channels k.
using ComplexGrid = Eigen::ArrayXXcd;
using MagnitudeGrid = Eigen::ArrayXXd;
/// Phase values in radians, c = M * exp(i * phase).
using PhaseGrid = Eigen::ArrayXXd;
using RealGrid = Eigen::ArrayXXd;
using BoolGrid = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace constants

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument to an operation (bad value, mismatched dimensions).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Filter bank or scale configuration that cannot be realized.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Input that carries no usable information (all-zero magnitude, zero reference).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported external data (WAV files, dumps, config files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Iterative frame inversion did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Receives non-fatal diagnostics (empty significance mask, stereo downmix, ...).
using WarningHandler = std::function<void(std::string_view)>;

/// Installs a handler and returns the previous one. The default prints to stderr;
/// an empty handler silences warnings.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

// ---------------------------------------------------------------------------

/// Finite sampled real signal.
struct RealSignal {
  Eigen::ArrayXd samples;
  double sample_rate = 44100.0;

  RealSignal() = default;
  RealSignal(Eigen::ArrayXd s, double fs);

  Index length() const noexcept { return samples.size(); }
  double duration() const noexcept {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

/// Throws ParameterError unless the signal satisfies L >= 1, fs > 0, finite samples.
void validate(const RealSignal& s);

/// Throws ParameterError if any grid entry is non-finite.
void validate_finite(const Eigen::ArrayXXd& grid, const char* what);
void validate_finite(const ComplexGrid& grid, const char* what);
/// Throws ParameterError if the magnitude grid has negative or non-finite entries.
void validate_magnitude(const MagnitudeGrid& m);

enum class Direction { forward, inverse };

/// DFT with 1/sqrt(L) scaling in both directions.
Eigen::ArrayXcd unitary_dft(const Eigen::ArrayXcd& x, Direction direction);

/// Wraps an angle into (-pi, pi].
template <std::floating_point Scalar>
Scalar principal_angle(Scalar x) noexcept {
  constexpr Scalar pi = std::numbers::pi_v<Scalar>;
  constexpr Scalar two_pi = 2 * pi;
  Scalar r = std::remainder(x, two_pi);  // [-pi, pi]
  if (r <= -pi) r += two_pi;
  return r;
}

template <typename Derived>
auto principal_angle(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return principal_angle(v); });
}

/// Peak-normalized Gaussian filter response exp(-pi * gamma^2 * (f - center)^2),
/// i.e. the Fourier transform of M_center D_gamma g0 scaled to peak 1.
template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> gaussian_spectrum(
    const Eigen::ArrayBase<Derived>& freq_grid, typename Derived::Scalar center,
    typename Derived::Scalar gamma) {
  using Scalar = typename Derived::Scalar;
  if (!(gamma > 0)) throw ParameterError("gaussian_spectrum: gamma must be positive");
  const Scalar c = std::numbers::pi_v<Scalar> * gamma * gamma;
  return (-c * (freq_grid - center).square()).exp();
}

/// Frequency offset from the center beyond which a peak-normalized Gaussian of
/// dilation gamma stays below 1e-17 of its peak.
double gaussian_support_halfwidth(double gamma) noexcept;

/// Smallest n' >= n whose prime factors are all <= 7.
Index next_fast_size(Index n);

}  // namespace fbpghi
