#include "fbpghi/core.hpp"

#include "fft.hpp"

#include <cmath>
#include <iostream>
#include <mutex>
#include <utility>

namespace fbpghi {

namespace {

std::mutex warning_mutex;

WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view message) {
    std::cerr << "warning: " << message << '\n';
  };
  return handler;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(warning_mutex);
  std::swap(warning_handler(), handler);
  return handler;
}

void warn(std::string_view message) {
  std::lock_guard lock(warning_mutex);
  if (warning_handler()) warning_handler()(message);
}

RealSignal::RealSignal(Eigen::ArrayXd s, double fs) : samples(std::move(s)), sample_rate(fs) {
  validate(*this);
}

void validate(const RealSignal& s) {
  if (s.samples.size() < 1) throw ParameterError("signal must have at least one sample");
  if (!(s.sample_rate > 0) || !std::isfinite(s.sample_rate))
    throw ParameterError("sample rate must be positive");
  if (!s.samples.isFinite().all()) throw ParameterError("signal contains non-finite samples");
}

void validate_finite(const Eigen::ArrayXXd& grid, const char* what) {
  if (!grid.isFinite().all()) throw ParameterError(std::string(what) + ": non-finite entries");
}

void validate_finite(const ComplexGrid& grid, const char* what) {
  if (!grid.real().isFinite().all() || !grid.imag().isFinite().all())
    throw ParameterError(std::string(what) + ": non-finite entries");
}

void validate_magnitude(const MagnitudeGrid& m) {
  validate_finite(m, "magnitude");
  if ((m < 0).any()) throw ParameterError("magnitude: negative entries");
}

Eigen::ArrayXcd unitary_dft(const Eigen::ArrayXcd& x, Direction direction) {
  if (x.size() < 1) throw ParameterError("unitary_dft: empty input");
  const double n = static_cast<double>(x.size());
  Eigen::VectorXcd v = x.matrix();
  if (direction == Direction::forward) return detail::fft(v).array() / std::sqrt(n);
  return detail::ifft(v).array() * std::sqrt(n);
}

double gaussian_support_halfwidth(double gamma) noexcept {
  // exp(-pi gamma^2 d^2) = 1e-17  <=>  d = sqrt(17 ln 10 / pi) / gamma
  static const double k = std::sqrt(17.0 * std::log(10.0) / constants::pi);
  return k / gamma;
}

Index next_fast_size(Index n) {
  if (n <= 1) return 1;
  for (Index m = n;; ++m) {
    Index r = m;
    for (Index p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace fbpghi
