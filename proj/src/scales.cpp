#include "fbpghi/scales.hpp"

#include <cmath>
#include <string>

namespace fbpghi {

namespace {

constexpr double kErbA = 21.4;
constexpr double kErbB = 0.00437;

void require_nonnegative(double f, const char* what) {
  if (!(f >= 0) || !std::isfinite(f))
    throw ParameterError(std::string(what) + ": argument must be finite and >= 0");
}

}  // namespace

std::string_view to_string(ScaleKind kind) {
  switch (kind) {
    case ScaleKind::erb: return "erb";
    case ScaleKind::log10q: return "logq";
    case ScaleKind::sqrt4: return "sqrt4";
    case ScaleKind::quart: return "quart";
    case ScaleKind::linear: return "linear";
  }
  return "?";
}

std::optional<ScaleKind> parse_scale_kind(std::string_view name) {
  if (name == "erb") return ScaleKind::erb;
  if (name == "logq" || name == "log10q" || name == "log") return ScaleKind::log10q;
  if (name == "sqrt4") return ScaleKind::sqrt4;
  if (name == "quart") return ScaleKind::quart;
  if (name == "linear") return ScaleKind::linear;
  return std::nullopt;
}

double scale_value(FrequencyScale scale, double f) {
  if (scale.kind == ScaleKind::log10q) {
    if (!(f > 0) || !std::isfinite(f))
      throw ParameterError("scale_value: log10q scale needs f > 0");
    return 10.0 * std::log(f);
  }
  require_nonnegative(f, "scale_value");
  switch (scale.kind) {
    case ScaleKind::erb: return kErbA * std::log1p(kErbB * f) / std::log(10.0);
    case ScaleKind::sqrt4: return std::expm1(0.5 * std::log1p(f / 4.0));
    case ScaleKind::quart: return 8.0 * std::expm1(0.25 * std::log1p(f));
    case ScaleKind::linear: return f;
    case ScaleKind::log10q: break;
  }
  return 0.0;
}

double scale_inverse(FrequencyScale scale, double u) {
  if (scale.kind == ScaleKind::log10q) {
    if (!std::isfinite(u)) throw ParameterError("scale_inverse: non-finite argument");
    return std::exp(u / 10.0);
  }
  require_nonnegative(u, "scale_inverse");
  switch (scale.kind) {
    case ScaleKind::erb: return std::expm1(u * std::log(10.0) / kErbA) / kErbB;
    case ScaleKind::sqrt4: return 4.0 * std::expm1(2.0 * std::log1p(u));
    case ScaleKind::quart: return std::expm1(4.0 * std::log1p(u / 8.0));
    case ScaleKind::linear: return u;
    case ScaleKind::log10q: break;
  }
  return 0.0;
}

double scale_derivative(FrequencyScale scale, double f) {
  if (scale.kind == ScaleKind::log10q) {
    if (!(f > 0)) throw ParameterError("scale_derivative: log10q scale needs f > 0");
    return 10.0 / f;
  }
  require_nonnegative(f, "scale_derivative");
  switch (scale.kind) {
    case ScaleKind::erb: return kErbA * kErbB / ((1.0 + kErbB * f) * std::log(10.0));
    case ScaleKind::sqrt4: return 0.125 / std::sqrt(1.0 + f / 4.0);
    case ScaleKind::quart: return 2.0 * std::pow(1.0 + f, -0.75);
    case ScaleKind::linear: return 1.0;
    case ScaleKind::log10q: break;
  }
  return 0.0;
}

double scale_second_derivative(FrequencyScale scale, double f) {
  if (scale.kind == ScaleKind::log10q) {
    if (!(f > 0)) throw ParameterError("scale_second_derivative: log10q scale needs f > 0");
    return -10.0 / (f * f);
  }
  require_nonnegative(f, "scale_second_derivative");
  switch (scale.kind) {
    case ScaleKind::erb: {
      const double d = 1.0 + kErbB * f;
      return -kErbA * kErbB * kErbB / (d * d * std::log(10.0));
    }
    case ScaleKind::sqrt4: return -(1.0 / 64.0) * std::pow(1.0 + f / 4.0, -1.5);
    case ScaleKind::quart: return -1.5 * std::pow(1.0 + f, -1.75);
    case ScaleKind::linear: return 0.0;
    case ScaleKind::log10q: break;
  }
  return 0.0;
}

void validate(const FilterBankSpec& spec) {
  if (!(spec.sample_rate > 0)) throw ConfigurationError("sample_rate must be positive");
  if (!(spec.fmin >= 0) || !(spec.fmin < spec.fmax) || !(spec.fmax <= spec.sample_rate / 2))
    throw ConfigurationError("need 0 <= fmin < fmax <= sample_rate/2");
  if (!(spec.bins > 0)) throw ConfigurationError("bins must be positive");
  if (!(spec.bw > 0)) throw ConfigurationError("bw must be positive");
  if (spec.decimation < 1) throw ConfigurationError("decimation must be >= 1");
  if (spec.scale.kind == ScaleKind::log10q && !(spec.fmin > 0))
    throw ConfigurationError("log10q scale needs fmin > 0");
}

Eigen::ArrayXd center_frequencies(const FilterBankSpec& spec) {
  validate(spec);
  const double u0 = scale_value(spec.scale, spec.fmin);
  const double u1 = scale_value(spec.scale, spec.fmax);
  // Relative slack so that an exact integer span is not lost to rounding.
  const double span = spec.bins * (u1 - u0);
  const auto count = static_cast<Index>(std::floor(span * (1.0 + 1e-12))) + 1;
  if (count < 3)
    throw ConfigurationError("filter bank needs at least 3 channels, got " +
                             std::to_string(count));
  Eigen::ArrayXd xi(count);
  xi(0) = spec.fmin;
  for (Index k = 1; k < count; ++k)
    xi(k) = std::min(scale_inverse(spec.scale, u0 + static_cast<double>(k) / spec.bins), spec.fmax);
  for (Index k = 1; k < count; ++k)
    if (!(xi(k) > xi(k - 1)))
      throw ConfigurationError("center frequencies are not strictly increasing");
  return xi;
}

Eigen::ArrayXd bandwidths(const FilterBankSpec& spec, const Eigen::ArrayXd& centers) {
  Eigen::ArrayXd gammas(centers.size());
  for (Index k = 0; k < centers.size(); ++k) {
    const double d = scale_derivative(spec.scale, centers(k));
    if (!(d > 0) || !std::isfinite(d))
      throw ConfigurationError("scale derivative vanishes at a channel center");
    gammas(k) = d / spec.bw;
  }
  return gammas;
}

Eigen::ArrayXd bandwidth_slopes(const FilterBankSpec& spec, const Eigen::ArrayXd& centers) {
  Eigen::ArrayXd slopes(centers.size());
  for (Index k = 0; k < centers.size(); ++k)
    slopes(k) = scale_second_derivative(spec.scale, centers(k)) / spec.bw;
  return slopes;
}

}  // namespace fbpghi
