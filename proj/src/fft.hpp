#pragma once

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

namespace fbpghi::detail {

// Eigen's kissfft backend caches twiddles per size; one instance per thread.
inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

/// Unscaled forward DFT: X[j] = sum_l x[l] exp(-2 pi i j l / L).
inline Eigen::VectorXcd fft(const Eigen::VectorXcd& x) {
  Eigen::VectorXcd out;
  fft_engine().fwd(out, x);
  return out;
}

inline Eigen::VectorXcd fft(const Eigen::VectorXd& x) {
  Eigen::VectorXcd in = x.cast<std::complex<double>>();
  return fft(in);
}

/// Inverse DFT including the 1/L factor.
inline Eigen::VectorXcd ifft(const Eigen::VectorXcd& x) {
  Eigen::VectorXcd out;
  fft_engine().inv(out, x);
  return out;
}

}  // namespace fbpghi::detail
