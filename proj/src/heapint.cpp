#include "fbpghi/heapint.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace fbpghi {

namespace {

struct HeapEntry {
  double magnitude;
  Index cell;
};

// Max-heap on magnitude; ties go to the lower cell index so runs are reproducible.
bool heap_less(const HeapEntry& x, const HeapEntry& y) {
  if (x.magnitude != y.magnitude) return x.magnitude < y.magnitude;
  return x.cell > y.cell;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_tolerance(double tol) {
  if (!(tol > 0 && tol < 1)) throw ParameterError("tolerance must lie in (0, 1)");
}

}  // namespace

SignificanceMask significant_set(const MagnitudeGrid& m, double tol) {
  check_tolerance(tol);
  validate_magnitude(m);
  SignificanceMask out;
  out.abstol = m.size() ? tol * m.maxCoeff() : 0.0;
  out.mask = m > out.abstol;
  if (out.count() == 0) warn("no significant coefficients; the phase will be fully random");
  return out;
}

double random_phase(std::uint64_t seed, Index n, Index k) noexcept {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(n));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(k) << 32 | static_cast<std::uint64_t>(k) >> 32));
  // 53 random bits -> (0, 1], then onto (-pi, pi].
  const double unit = (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
  return constants::pi * (2.0 * unit - 1.0);
}

PhaseGrid heap_integrate(const MagnitudeGrid& m, const GradientField& grads, const Eigen::ArrayXd& centers,
                         Index a, double sample_rate, const HeapIntegrationOptions& options) {
  const Index frames = m.rows();
  const Index channels = m.cols();
  if (grads.d_time.rows() != frames || grads.d_time.cols() != channels ||
      grads.d_freq.rows() != frames || grads.d_freq.cols() != channels)
    throw ParameterError("heap_integrate: gradient field does not match the magnitude grid");
  if (centers.size() != channels) throw ParameterError("heap_integrate: centers do not match channels");
  if (a < 1 || !(sample_rate > 0)) throw ParameterError("heap_integrate: invalid time step");

  const SignificanceMask significant = significant_set(m, options.tol);
  const auto& observer = options.observer;
  const auto cell_of = [channels](Index n, Index k) { return n * channels + k; };

  PhaseGrid phase(frames, channels);
  // 0: insignificant or done, 1: still in the set I.
  std::vector<unsigned char> remaining(static_cast<std::size_t>(frames * channels), 0);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(significant.count()));
  for (Index n = 0; n < frames; ++n)
    for (Index k = 0; k < channels; ++k) {
      if (significant.mask(n, k)) {
        remaining[static_cast<std::size_t>(cell_of(n, k))] = 1;
        order.push_back(cell_of(n, k));
      } else {
        phase(n, k) = random_phase(options.seed, n, k);
      }
    }
  // Island seeds are taken in descending magnitude order from this list.
  const auto mag_of = [&](Index cell) { return m(cell / channels, cell % channels); };
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return mag_of(x) > mag_of(y); });

  std::vector<HeapEntry> heap;
  heap.reserve(order.size());
  const auto push = [&](Index n, Index k, IntegrationEvent::Kind kind) {
    remaining[static_cast<std::size_t>(cell_of(n, k))] = 0;
    heap.push_back({m(n, k), cell_of(n, k)});
    std::push_heap(heap.begin(), heap.end(), heap_less);
    if (observer) observer({kind, n, k, m(n, k)});
  };

  auto next_seed = order.begin();
  Index left = static_cast<Index>(order.size());
  while (left > 0) {
    if (heap.empty()) {
      while (!remaining[static_cast<std::size_t>(*next_seed)]) ++next_seed;
      const Index n = *next_seed / channels, k = *next_seed % channels;
      phase(n, k) = 0.0;
      push(n, k, IntegrationEvent::Kind::seed);
      --left;
    }
    std::pop_heap(heap.begin(), heap.end(), heap_less);
    const HeapEntry top = heap.back();
    heap.pop_back();
    const Index n = top.cell / channels, k = top.cell % channels;
    if (observer) observer({IntegrationEvent::Kind::pop, n, k, top.magnitude});

    for (int dir : {1, -1}) {
      const Index nn = n + dir;
      if (nn >= 0 && nn < frames && remaining[static_cast<std::size_t>(cell_of(nn, k))]) {
        phase(nn, k) = integrate_time_step(phase(n, k), grads.d_time(n, k), grads.d_time(nn, k), a,
                                           sample_rate, dir);
        push(nn, k, IntegrationEvent::Kind::push);
        --left;
      }
      const Index kk = k + dir;
      if (kk >= 0 && kk < channels && remaining[static_cast<std::size_t>(cell_of(n, kk))]) {
        phase(n, kk) = integrate_freq_step(phase(n, k), grads.d_freq(n, k), grads.d_freq(n, kk),
                                           centers(k), centers(kk));
        push(n, kk, IntegrationEvent::Kind::push);
        --left;
      }
    }
  }
  // Drain the cells whose neighbors are all done; they carry no further work.
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), heap_less);
    const HeapEntry top = heap.back();
    heap.pop_back();
    if (observer)
      observer({IntegrationEvent::Kind::pop, top.cell / channels, top.cell % channels, top.magnitude});
  }
  return phase;
}

ComplexGrid polar_grid(const MagnitudeGrid& m, const PhaseGrid& phase) {
  if (m.rows() != phase.rows() || m.cols() != phase.cols())
    throw ParameterError("polar_grid: magnitude and phase dimensions differ");
  return m.binaryExpr(phase, [](double r, double p) { return std::polar(r, p); });
}

PhaseGrid reconstruct_phase(const MagnitudeGrid& m, const FilterBank& fb,
                            const ReconstructOptions& options) {
  const GradientField grads = estimate_phase_gradients(m, fb, options.rel_floor);
  HeapIntegrationOptions heap;
  heap.tol = options.tol;
  heap.seed = options.seed;
  return heap_integrate(m, grads, fb.centers(), fb.decimation(), fb.sample_rate(), heap);
}

RealSignal reconstruct(const MagnitudeGrid& m, const FilterBank& fb,
                       const ReconstructOptions& options) {
  if (m.rows() != fb.frames() || m.cols() != fb.channels())
    throw ParameterError("reconstruct: magnitude does not match filter bank dimensions");
  check_tolerance(options.tol);
  validate_magnitude(m);
  if (m.size() == 0 || m.maxCoeff() == 0.0)
    return RealSignal{Eigen::ArrayXd::Zero(fb.length()), fb.sample_rate()};
  return synthesize(fb, polar_grid(m, reconstruct_phase(m, fb, options)), options.synthesis);
}

}  // namespace fbpghi
