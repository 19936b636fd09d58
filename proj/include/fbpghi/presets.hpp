#pragma once

#include "fbpghi/scales.hpp"

#include <array>
#include <stdexcept>

namespace fbpghi {

/// The five evaluation filter banks FB(1)..FB(5) at 44.1 kHz.
///
///   (1) ERB,  bins 1, bw 2,   0 Hz .. fs/2, a = 8
///   (2) ERB,  bins 4, bw 1/2, 0 Hz .. fs/2, a = 36
///   (3) logq, bins 4, bw 1/2, 30 Hz .. fs/2, a = 20
///   (4) sqrt4, bins 4, bw 1/2, 0 Hz .. fs/2, a = 73
///   (5) quart, bins 4, bw 1/2, 0 Hz .. fs/2, a = 33
inline FilterBankSpec preset_filterbank(int index, double sample_rate = 44100.0) {
  FilterBankSpec s;
  s.sample_rate = sample_rate;
  s.fmax = sample_rate / 2;
  s.bins = 4.0;
  s.bw = 0.5;
  switch (index) {
    case 1:
      s.scale.kind = ScaleKind::erb;
      s.bins = 1.0;
      s.bw = 2.0;
      s.decimation = 8;
      break;
    case 2:
      s.scale.kind = ScaleKind::erb;
      s.decimation = 36;
      break;
    case 3:
      s.scale.kind = ScaleKind::log10q;
      s.fmin = 30.0;
      s.decimation = 20;
      break;
    case 4:
      s.scale.kind = ScaleKind::sqrt4;
      s.decimation = 73;
      break;
    case 5:
      s.scale.kind = ScaleKind::quart;
      s.decimation = 33;
      break;
    default:
      throw ParameterError("filter bank preset index must be 1..5");
  }
  return s;
}

/// Reference redundancies 2K/a for FB(1)..FB(5).
inline constexpr std::array<double, 5> kPresetRedundancy{10.75, 9.44, 26.40, 8.00, 21.58};

}  // namespace fbpghi
