#include "fbpghi/fgla.hpp"

#include "fbpghi/heapint.hpp"
#include "fbpghi/metrics.hpp"

#include <cmath>

namespace fbpghi {

namespace {

void require_grid(const FilterBank& fb, Index rows, Index cols, const char* what) {
  if (rows != fb.frames() || cols != fb.channels())
    throw ParameterError(std::string(what) + ": grid does not match filter bank dimensions");
}

}  // namespace

ComplexGrid project_consistent(const FilterBank& fb, const ComplexGrid& c,
                               const SynthesisOptions& options) {
  require_grid(fb, c.rows(), c.cols(), "project_consistent");
  return analyze(fb, synthesize(fb, c, options));
}

ComplexGrid replace_magnitude(const ComplexGrid& c, const MagnitudeGrid& m) {
  if (c.rows() != m.rows() || c.cols() != m.cols())
    throw ParameterError("replace_magnitude: grids differ in shape");
  return c.binaryExpr(m, [](const Complex& z, double r) {
    const double mag = std::abs(z);
    return mag > 0 ? z * (r / mag) : Complex(r, 0.0);
  });
}

FglaResult fgla(const MagnitudeGrid& m, const FilterBank& fb, const FglaOptions& options) {
  require_grid(fb, m.rows(), m.cols(), "fgla");
  if (options.iterations < 1) throw ParameterError("fgla: iterations must be at least 1");
  if (!(options.alpha >= 0 && options.alpha < 1))
    throw ParameterError("fgla: alpha must lie in [0, 1)");
  validate_magnitude(m);

  PhaseGrid phase(m.rows(), m.cols());
  if (options.initial_phase) {
    require_grid(fb, options.initial_phase->rows(), options.initial_phase->cols(), "fgla");
    phase = *options.initial_phase;
  } else {
    for (Index n = 0; n < m.rows(); ++n)
      for (Index k = 0; k < m.cols(); ++k) phase(n, k) = random_phase(options.seed, n, k);
  }

  FglaResult out;
  out.trace.alpha = options.alpha;
  ComplexGrid c = polar_grid(m, phase);
  ComplexGrid previous = c;
  for (int i = 0; i < options.iterations; ++i) {
    out.signal = synthesize(fb, replace_magnitude(c, m), options.synthesis);
    ComplexGrid t = analyze(fb, out.signal);
    if (options.record_trace) out.trace.values.push_back(spectral_difference(m, MagnitudeGrid(t.abs())));
    c = t + options.alpha * (t - previous);
    previous = std::move(t);
    ++out.trace.iterations;
  }
  return out;
}

}  // namespace fbpghi
