#pragma once

#include "fbpghi/core.hpp"
#include "fbpghi/filterbank.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace fbpghi {

/// Spectral difference (dB) of the signal produced at each iteration.
struct FglaTrace {
  std::vector<double> values;
  int iterations = 0;
  double alpha = 0.0;
};

struct FglaOptions {
  int iterations = 100;
  double alpha = 0.99;  ///< momentum; 0 gives classical Griffin-Lim
  std::uint64_t seed = 0;
  std::optional<PhaseGrid> initial_phase;  ///< random_phase(seed, n, k) when empty
  bool record_trace = true;
  SynthesisOptions synthesis;
};

struct FglaResult {
  RealSignal signal;
  FglaTrace trace;
};

/// analyze(fb, synthesize(fb, c)).
ComplexGrid project_consistent(const FilterBank& fb, const ComplexGrid& c,
                               const SynthesisOptions& options = {});

/// m * c / |c|, with phase 0 where c vanishes.
ComplexGrid replace_magnitude(const ComplexGrid& c, const MagnitudeGrid& m);

/// Fast Griffin-Lim: t_i = P1(P2(c_i)), c_{i+1} = t_i + alpha (t_i - t_{i-1}),
/// where P2 imposes the magnitude m and P1 is the consistency projection.
FglaResult fgla(const MagnitudeGrid& m, const FilterBank& fb, const FglaOptions& options = {});

}  // namespace fbpghi
