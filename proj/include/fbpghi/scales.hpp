#pragma once

#include "fbpghi/core.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>

namespace fbpghi {

/// Frequency scales that place channels and set the frequency-bandwidth relationship.
///
///   erb    21.4 log10(1 + 0.00437 f)          (Glasberg-Moore ERB number)
///   log10q 10 ln(f)                           (constant-Q; defined for f > 0 only)
///   sqrt4  (1 + f/4)^(1/2) - 1
///   quart  8 ((1 + f)^(1/4) - 1)
///   linear f                                  (constant bandwidth, STFT-like)
///
/// All frequencies are in Hz.
enum class ScaleKind { erb, log10q, sqrt4, quart, linear };

std::string_view to_string(ScaleKind kind);
/// Accepts the names above plus "logq" and "log" for log10q.
std::optional<ScaleKind> parse_scale_kind(std::string_view name);

struct FrequencyScale {
  ScaleKind kind = ScaleKind::erb;
};

/// Scale units at frequency f. Throws ParameterError for f < 0 (f <= 0 for log10q).
double scale_value(FrequencyScale scale, double f);
/// Frequency in Hz at scale position u. Throws ParameterError for u < 0, except
/// on log10q where every real u is valid.
double scale_inverse(FrequencyScale scale, double u);
/// d scale_value / df in units per Hz.
double scale_derivative(FrequencyScale scale, double f);
/// d^2 scale_value / df^2.
double scale_second_derivative(FrequencyScale scale, double f);

struct FilterBankSpec {
  FrequencyScale scale;
  double bins = 1.0;  ///< filters per scale unit
  double bw = 1.0;    ///< filter bandwidth in scale units
  double fmin = 0.0;
  double fmax = 22050.0;
  Index decimation = 1;
  double sample_rate = 44100.0;
  /// Add Gaussian lowpass/highpass channels at 0 Hz and Nyquist when the scale
  /// channels leave a gap wider than the outermost channel's bandwidth.
  bool edge_channels = true;
};

/// Throws ConfigurationError unless 0 <= fmin < fmax <= fs/2, bins > 0, bw > 0, a >= 1.
void validate(const FilterBankSpec& spec);

/// xi(k) = scale_inverse(scale_value(fmin) + k / bins), k = 0..K-1, with
/// K = floor(bins * (scale_value(fmax) - scale_value(fmin))) + 1.
Eigen::ArrayXd center_frequencies(const FilterBankSpec& spec);

/// gamma_k = scale_derivative(xi_k) / bw in seconds, so the nominal bandwidth is 1/gamma_k Hz.
Eigen::ArrayXd bandwidths(const FilterBankSpec& spec, const Eigen::ArrayXd& centers);

/// Analytic d gamma / d xi at the given centers (seconds per Hz).
Eigen::ArrayXd bandwidth_slopes(const FilterBankSpec& spec, const Eigen::ArrayXd& centers);

}  // namespace fbpghi
