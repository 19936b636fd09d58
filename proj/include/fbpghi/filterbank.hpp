#pragma once

#include "fbpghi/core.hpp"
#include "fbpghi/scales.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace fbpghi {

/// One frequency-domain filter, stored as a band of samples along the
/// unwrapped DFT index. Sample t sits at DFT index (first_bin + t) mod L and
/// frequency (first_bin + t) * fs / L, so periodization is implicit.
struct Channel {
  double center = 0.0;       ///< Hz
  double gamma = 1.0;        ///< seconds; nominal bandwidth 1/gamma Hz
  double gamma_slope = 0.0;  ///< d gamma / d xi, seconds per Hz
  bool edge = false;         ///< lowpass/highpass completion channel
  double bin_hz = 1.0;  ///< DFT bin spacing fs / L
  Index first_bin = 0;
  Eigen::ArrayXd response;

  /// Frequency in Hz of band sample t (unwrapped, may lie outside [0, fs)).
  double frequency(Index t) const noexcept {
    return static_cast<double>(first_bin + t) * bin_hz;
  }
};

/// Samples exp(-pi gamma^2 (f - center)^2) on the L-point DFT grid over the
/// band where it exceeds 1e-17.
Channel make_gaussian_channel(double center, double gamma, double gamma_slope, Index length,
                              double sample_rate);

/// Uniform filter bank with decimation a on signals of length L (a | L).
class FilterBank {
 public:
  FilterBank(FilterBankSpec spec, Index length, std::vector<Channel> channels);

  const FilterBankSpec& spec() const noexcept { return spec_; }
  Index length() const noexcept { return length_; }
  Index decimation() const noexcept { return spec_.decimation; }
  Index frames() const noexcept { return length_ / spec_.decimation; }
  Index channels() const noexcept { return static_cast<Index>(bands_.size()); }
  double sample_rate() const noexcept { return spec_.sample_rate; }

  const Channel& channel(Index k) const { return bands_.at(static_cast<std::size_t>(k)); }
  const std::vector<Channel>& channel_list() const noexcept { return bands_; }

  const Eigen::ArrayXd& centers() const noexcept { return centers_; }
  const Eigen::ArrayXd& gammas() const noexcept { return gammas_; }
  const Eigen::ArrayXd& gamma_slopes() const noexcept { return gamma_slopes_; }

  /// Dense periodized response of channel k on the L-point DFT grid.
  Eigen::ArrayXd response(Index k) const;

  /// Diagonal of the frame operator in the DFT domain,
  /// sum_k (|g_k[j]|^2 + |g_k[-j]|^2) / (2a).
  const Eigen::ArrayXd& diagonal_symbol() const noexcept { return symbol_; }

  /// Same filters, different decimation. Throws ConfigurationError unless a | L.
  FilterBank with_decimation(Index a) const;

 private:
  FilterBankSpec spec_;
  Index length_;
  std::vector<Channel> bands_;
  Eigen::ArrayXd centers_, gammas_, gamma_slopes_, symbol_;
};

/// Gaussian filter bank for the spec's scale on signals of length L.
FilterBank build_filterbank(const FilterBankSpec& spec, Index length);

/// Smallest length >= L that is a multiple of a with an FFT-friendly frame count.
Index padded_length(Index length, Index decimation);

/// Zero-pads s to the given length (no-op if already that long).
RealSignal zero_pad(const RealSignal& s, Index length);

/// Unnormalized DFT of the signal, the input to the per-channel routines.
Eigen::VectorXcd signal_spectrum(const RealSignal& s);

/// Complex weight applied to a channel's response as a function of the
/// normalized offset u = gamma * (f - center); used for auxiliary filters.
using ResponseWeight = std::function<Complex(double u)>;

/// Coefficients of a single channel at stride `stride` (stride | L):
/// c[n] = <s, T_{n stride} g>, computed by folding the product spectrum.
Eigen::ArrayXcd analyze_channel(const Channel& channel, const Eigen::VectorXcd& spectrum,
                                Index stride, const ResponseWeight& weight = {});

/// N x K analysis coefficients c[n,k] = <s, T_{na} g_k>.
ComplexGrid analyze(const FilterBank& fb, const RealSignal& s);

/// S s = Re(D^H D s); <S s, s> equals the coefficient energy.
RealSignal frame_operator_apply(const FilterBank& fb, const RealSignal& s);

/// Re(D^H c): adjoint of the analysis map for real signals.
RealSignal adjoint(const FilterBank& fb, const ComplexGrid& c);

struct SynthesisOptions {
  double tolerance = 1e-10;  ///< relative residual
  int max_iterations = 200;
};

struct SynthesisInfo {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Canonical dual synthesis S^{-1} Re(D^H c) by preconditioned conjugate
/// gradients. Throws ConvergenceError if the tolerance is not met.
RealSignal synthesize(const FilterBank& fb, const ComplexGrid& c,
                      const SynthesisOptions& options = {}, SynthesisInfo* info = nullptr);

struct FrameBounds {
  double lower = 0.0;  ///< 0 flags a failed inverse iteration (no usable frame)
  double upper = 0.0;
};

/// Power iteration on S for the upper bound, inverse iteration through CG for the lower.
FrameBounds estimate_frame_bounds(const FilterBank& fb, int iterations = 50);

/// R = 2K/a.
double redundancy(const FilterBank& fb) noexcept;

}  // namespace fbpghi
