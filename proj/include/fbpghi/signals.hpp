#pragma once

#include "fbpghi/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fbpghi {

/// s1: octave sine stack, s2: sines + impulses + two exponential chirps,
/// s3: white noise, wav: loaded from a file.
enum class SignalKind { s1, s2, s3, wav };

std::string_view to_string(SignalKind kind);
std::optional<SignalKind> parse_signal_kind(std::string_view name);

struct SignalSpec {
  SignalKind kind = SignalKind::s1;
  double duration = 1.0;  ///< seconds; ignored for wav
  double sample_rate = 44100.0;
  std::uint64_t seed = 1;  ///< s3 only
  std::string path;        ///< wav only
};

/// Throws ParameterError for nonpositive duration or sample rate.
void validate(const SignalSpec& spec);

///   s1[l] = sum_{k=0}^{7} sin(220 pi 2^k l / fs)
///   s2[l] = sum_{k=0}^{3} sin(220 pi 4^k l / fs) + sum_{k=1}^{8} delta[l - 5000k]
///           + chirp 500 -> 15000 Hz + chirp 18000 -> 3000 Hz
///   s3[l] = standard normal samples from mt19937_64(seed)
/// Impulses past the end of a short signal are dropped.
RealSignal gen_signal(const SignalSpec& spec);

/// sin(2 pi int_0^t f) with f(t) = f_start (f_end / f_start)^(t / duration).
/// Both frequencies must lie in (0, sample_rate / 2).
RealSignal exp_chirp(double f_start, double f_end, double duration, double sample_rate);

}  // namespace fbpghi
