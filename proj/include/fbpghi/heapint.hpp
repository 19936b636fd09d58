#pragma once

#include "fbpghi/core.hpp"
#include "fbpghi/filterbank.hpp"
#include "fbpghi/gradient.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>

namespace fbpghi {

/// Cells with magnitude above abstol = tol * max(m).
struct SignificanceMask {
  BoolGrid mask;
  double abstol = 0.0;

  Index count() const { return mask.count(); }
};

/// Throws ParameterError unless 0 < tol < 1; warns when no cell is significant.
SignificanceMask significant_set(const MagnitudeGrid& m, double tol);

/// Trapezoidal step to the time neighbor n + direction (direction = +1 or -1)
/// over a / sample_rate seconds.
inline double integrate_time_step(double phase, double d_here, double d_neighbor, Index a,
                                  double sample_rate, int direction) {
  const double step = static_cast<double>(a) / sample_rate;
  return phase + direction * step * 0.5 * (d_neighbor + d_here);
}

/// Trapezoidal step to the frequency neighbor centered at xi_neighbor.
inline double integrate_freq_step(double phase, double d_here, double d_neighbor, double xi_here,
                                  double xi_neighbor) {
  return phase + (xi_neighbor - xi_here) * 0.5 * (d_neighbor + d_here);
}

/// Uniform phase in (-pi, pi] from a counter-based generator keyed by (seed, n, k).
double random_phase(std::uint64_t seed, Index n, Index k) noexcept;

/// Heap bookkeeping reported to an IntegrationObserver.
struct IntegrationEvent {
  enum class Kind { seed, pop, push } kind;
  Index n = 0;
  Index k = 0;
  double magnitude = 0.0;
};
using IntegrationObserver = std::function<void(const IntegrationEvent&)>;

struct HeapIntegrationOptions {
  double tol = 1e-7;
  std::uint64_t seed = 0;
  IntegrationObserver observer;  ///< optional, called for every seed/pop/push
};

/// Magnitude-ordered integration of the gradient field. Each island of
/// significant cells is anchored at phase 0 at its largest cell; insignificant
/// cells get random_phase(seed, n, k).
PhaseGrid heap_integrate(const MagnitudeGrid& m, const GradientField& grads, const Eigen::ArrayXd& centers,
                         Index a, double sample_rate, const HeapIntegrationOptions& options = {});

/// m * exp(i phase).
ComplexGrid polar_grid(const MagnitudeGrid& m, const PhaseGrid& phase);

struct ReconstructOptions {
  double tol = 1e-7;
  std::uint64_t seed = 0;
  double rel_floor = 1e-10;
  SynthesisOptions synthesis;
};

/// Phase estimate for the bank: magnitude-only gradients followed by fbpghi.
PhaseGrid reconstruct_phase(const MagnitudeGrid& m, const FilterBank& fb,
                            const ReconstructOptions& options = {});

/// Signal from magnitudes alone. An all-zero magnitude yields the zero signal.
RealSignal reconstruct(const MagnitudeGrid& m, const FilterBank& fb,
                       const ReconstructOptions& options = {});

}  // namespace fbpghi
