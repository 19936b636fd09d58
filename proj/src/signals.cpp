#include "fbpghi/signals.hpp"

#include "fbpghi/wav.hpp"

#include <cmath>
#include <random>

namespace fbpghi {

namespace {

using constants::pi;
using constants::two_pi;

Index sample_count(double duration, double sample_rate) {
  return static_cast<Index>(std::llround(duration * sample_rate));
}

}  // namespace

std::string_view to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::s1: return "s1";
    case SignalKind::s2: return "s2";
    case SignalKind::s3: return "s3";
    case SignalKind::wav: return "wav";
  }
  return "s1";
}

std::optional<SignalKind> parse_signal_kind(std::string_view name) {
  for (SignalKind k : {SignalKind::s1, SignalKind::s2, SignalKind::s3, SignalKind::wav})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

void validate(const SignalSpec& spec) {
  if (!(spec.sample_rate > 0)) throw ParameterError("signal sample rate must be positive");
  if (spec.kind == SignalKind::wav) {
    if (spec.path.empty()) throw ParameterError("wav signal needs a path");
    return;
  }
  if (!(spec.duration > 0)) throw ParameterError("signal duration must be positive");
  if (sample_count(spec.duration, spec.sample_rate) < 1)
    throw ParameterError("signal duration is shorter than one sample");
}

RealSignal exp_chirp(double f_start, double f_end, double duration, double sample_rate) {
  if (!(sample_rate > 0) || !(duration > 0)) throw ParameterError("exp_chirp: invalid duration");
  const double nyquist = sample_rate / 2;
  if (!(f_start > 0 && f_start < nyquist && f_end > 0 && f_end < nyquist))
    throw ParameterError("exp_chirp: frequencies must lie in (0, sample_rate / 2)");
  const Index length = std::max<Index>(1, sample_count(duration, sample_rate));
  const double rate = std::log(f_end / f_start);
  Eigen::ArrayXd s(length);
  for (Index l = 0; l < length; ++l) {
    const double t = static_cast<double>(l) / sample_rate;
    // Cycles elapsed: f_start T / ln r (r^(t/T) - 1); the tone limit when r = 1.
    const double cycles =
        rate == 0.0 ? f_start * t : f_start * duration / rate * std::expm1(rate * t / duration);
    s(l) = std::sin(two_pi * cycles);
  }
  return RealSignal{s, sample_rate};
}

RealSignal gen_signal(const SignalSpec& spec) {
  validate(spec);
  const double fs = spec.sample_rate;
  if (spec.kind == SignalKind::wav) return read_wav(spec.path);

  const Index length = sample_count(spec.duration, fs);
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(length);
  const Eigen::ArrayXd l = Eigen::ArrayXd::LinSpaced(length, 0.0, static_cast<double>(length - 1));
  switch (spec.kind) {
    case SignalKind::s1:
      for (int k = 0; k <= 7; ++k) s += (220.0 * pi * std::ldexp(1.0, k) * l / fs).sin();
      break;
    case SignalKind::s2:
      for (int k = 0; k <= 3; ++k) s += (220.0 * pi * std::ldexp(1.0, 2 * k) * l / fs).sin();
      for (Index k = 1; k <= 8; ++k)
        if (5000 * k < length) s(5000 * k) += 1.0;
      s += exp_chirp(500.0, 15000.0, spec.duration, fs).samples.head(length);
      s += exp_chirp(18000.0, 3000.0, spec.duration, fs).samples.head(length);
      break;
    case SignalKind::s3: {
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<double> normal;
      for (Index i = 0; i < length; ++i) s(i) = normal(rng);
      break;
    }
    case SignalKind::wav: break;
  }
  return RealSignal{s, fs};
}

}  // namespace fbpghi
