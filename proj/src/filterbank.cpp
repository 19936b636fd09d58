#include "fbpghi/filterbank.hpp"

#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

namespace fbpghi {

namespace {

Index wrap(Index i, Index m) {
  const Index r = i % m;
  return r < 0 ? r + m : r;
}

// Spectrum of the real part of the signal whose spectrum is y.
void hermitian_part(Eigen::VectorXcd& y) {
  const Index length = y.size();
  Eigen::VectorXcd out(length);
  for (Index j = 0; j < length; ++j) out(j) = 0.5 * (y(j) + std::conj(y((length - j) % length)));
  y.swap(out);
}

double inner(const Eigen::VectorXcd& x, const Eigen::VectorXcd& y) { return x.dot(y).real(); }

// Walks a channel band, calling f(t, dft_index, fold_index) for each sample.
template <typename F>
void for_each_sample(const Channel& ch, Index length, Index folded, F&& f) {
  Index il = wrap(ch.first_bin, length);
  Index in = wrap(ch.first_bin, folded);
  for (Index t = 0; t < ch.response.size(); ++t) {
    f(t, il, in);
    if (++il == length) il = 0;
    if (++in == folded) in = 0;
  }
}

// Frame operator on the spectrum of a real signal; the result is again Hermitian.
Eigen::VectorXcd frame_operator_spectral(const FilterBank& fb, const Eigen::VectorXcd& x) {
  const Index length = fb.length();
  const Index frames = fb.frames();
  const double inv_a = 1.0 / static_cast<double>(fb.decimation());
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(length);
  Eigen::VectorXcd folded(frames);
  for (const Channel& ch : fb.channel_list()) {
    folded.setZero();
    for_each_sample(ch, length, frames,
                    [&](Index t, Index il, Index in) { folded(in) += x(il) * ch.response(t); });
    for_each_sample(ch, length, frames, [&](Index t, Index il, Index in) {
      y(il) += ch.response(t) * inv_a * folded(in);
    });
  }
  hermitian_part(y);
  return y;
}

Eigen::VectorXcd adjoint_spectral(const FilterBank& fb, const ComplexGrid& c) {
  const Index length = fb.length();
  const Index frames = fb.frames();
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(length);
  for (Index k = 0; k < fb.channels(); ++k) {
    const Channel& ch = fb.channel(k);
    const Eigen::VectorXcd chat = detail::fft(Eigen::VectorXcd(c.col(k).matrix()));
    for_each_sample(ch, length, frames,
                    [&](Index t, Index il, Index in) { y(il) += ch.response(t) * chat(in); });
  }
  hermitian_part(y);
  return y;
}

Eigen::VectorXcd precondition(const FilterBank& fb, const Eigen::VectorXcd& r) {
  return (r.array() / fb.diagonal_symbol()).matrix();
}

// Solves S x = b for Hermitian spectra b by preconditioned CG.
Eigen::VectorXcd pcg_solve(const FilterBank& fb, const Eigen::VectorXcd& b,
                           const SynthesisOptions& options, SynthesisInfo& info) {
  const double bnorm = std::sqrt(inner(b, b));
  info = {};
  if (bnorm == 0.0) return Eigen::VectorXcd::Zero(b.size());

  Eigen::VectorXcd x = precondition(fb, b);
  Eigen::VectorXcd r = b - frame_operator_spectral(fb, x);
  Eigen::VectorXcd z = precondition(fb, r);
  Eigen::VectorXcd p = z;
  double rz = inner(r, z);
  double rel = std::sqrt(inner(r, r)) / bnorm;
  int it = 0;
  while (rel > options.tolerance && it < options.max_iterations) {
    const Eigen::VectorXcd sp = frame_operator_spectral(fb, p);
    const double alpha = rz / inner(p, sp);
    x += alpha * p;
    r -= alpha * sp;
    z = precondition(fb, r);
    const double rz_next = inner(r, z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    rel = std::sqrt(inner(r, r)) / bnorm;
    ++it;
  }
  info.iterations = it;
  info.relative_residual = rel;
  if (rel > options.tolerance)
    throw ConvergenceError("frame inversion did not converge: relative residual " +
                               std::to_string(rel) + " after " + std::to_string(it) +
                               " iterations",
                           rel);
  return x;
}

Eigen::ArrayXd real_ifft(const Eigen::VectorXcd& spectrum) {
  return detail::ifft(spectrum).real().array();
}

void require_length(const FilterBank& fb, const RealSignal& s) {
  if (s.length() != fb.length())
    throw ParameterError("signal length " + std::to_string(s.length()) +
                         " does not match filter bank length " + std::to_string(fb.length()));
}

}  // namespace

Channel make_gaussian_channel(double center, double gamma, double gamma_slope, Index length,
                              double sample_rate) {
  if (!(gamma > 0)) throw ConfigurationError("channel gamma must be positive");
  if (length < 1) throw ParameterError("length must be positive");
  const double df = sample_rate / static_cast<double>(length);
  const double half = gaussian_support_halfwidth(gamma);
  const auto lo = static_cast<Index>(std::ceil((center - half) / df));
  const auto hi = static_cast<Index>(std::floor((center + half) / df));
  Channel ch;
  ch.center = center;
  ch.gamma = gamma;
  ch.gamma_slope = gamma_slope;
  ch.bin_hz = df;
  ch.first_bin = lo;
  if (hi < lo) {
    // Narrower than one bin: keep the nearest sample so the channel is never empty.
    ch.first_bin = static_cast<Index>(std::lround(center / df));
    ch.response = gaussian_spectrum(Eigen::ArrayXd::Constant(1, ch.first_bin * df), center, gamma);
    return ch;
  }
  const Eigen::ArrayXd freqs = Eigen::ArrayXd::LinSpaced(hi - lo + 1, static_cast<double>(lo),
                                                         static_cast<double>(hi)) * df;
  ch.response = gaussian_spectrum(freqs, center, gamma);
  return ch;
}

FilterBank::FilterBank(FilterBankSpec spec, Index length, std::vector<Channel> bands)
    : spec_(std::move(spec)), length_(length), bands_(std::move(bands)) {
  if (spec_.decimation < 1) throw ConfigurationError("decimation must be >= 1");
  if (length_ < 1 || length_ % spec_.decimation != 0)
    throw ConfigurationError("decimation " + std::to_string(spec_.decimation) +
                             " does not divide signal length " + std::to_string(length_));
  if (bands_.size() < 3) throw ConfigurationError("filter bank needs at least 3 channels");

  const Index count = channels();
  centers_.resize(count);
  gammas_.resize(count);
  gamma_slopes_.resize(count);
  symbol_ = Eigen::ArrayXd::Zero(length_);
  Eigen::ArrayXd dense = Eigen::ArrayXd::Zero(length_);
  for (Index k = 0; k < count; ++k) {
    const Channel& ch = bands_[static_cast<std::size_t>(k)];
    if ((ch.response < 0).any() || !ch.response.isFinite().all())
      throw ConfigurationError("filter responses must be finite and nonnegative");
    centers_(k) = ch.center;
    gammas_(k) = ch.gamma;
    gamma_slopes_(k) = ch.gamma_slope;
    for_each_sample(ch, length_, length_,
                    [&](Index t, Index il, Index) { dense(il) += ch.response(t); });
    for_each_sample(ch, length_, length_, [&](Index, Index il, Index) {
      if (dense(il) != 0.0) {
        const double v = dense(il);
        symbol_(il) += 0.5 * v * v;
        symbol_((length_ - il) % length_) += 0.5 * v * v;
        dense(il) = 0.0;
      }
    });
  }
  symbol_ /= static_cast<double>(spec_.decimation);
  const double floor = 1e-14 * symbol_.maxCoeff();
  symbol_ = symbol_.max(floor > 0 ? floor : 1e-300);
}

Eigen::ArrayXd FilterBank::response(Index k) const {
  const Channel& ch = channel(k);
  Eigen::ArrayXd dense = Eigen::ArrayXd::Zero(length_);
  for_each_sample(ch, length_, length_,
                  [&](Index t, Index il, Index) { dense(il) += ch.response(t); });
  return dense;
}

FilterBank FilterBank::with_decimation(Index a) const {
  FilterBankSpec s = spec_;
  s.decimation = a;
  return FilterBank(s, length_, bands_);
}

FilterBank build_filterbank(const FilterBankSpec& spec, Index length) {
  validate(spec);
  if (length < 1 || length % spec.decimation != 0)
    throw ConfigurationError("decimation " + std::to_string(spec.decimation) +
                             " does not divide signal length " + std::to_string(length));
  const Eigen::ArrayXd centers = center_frequencies(spec);
  const Eigen::ArrayXd gammas = bandwidths(spec, centers);
  const Eigen::ArrayXd slopes = bandwidth_slopes(spec, centers);
  const double fs = spec.sample_rate;
  const double nyquist = fs / 2;

  std::vector<Channel> channels;
  channels.reserve(static_cast<std::size_t>(centers.size()) + 2);
  const Index last = centers.size() - 1;
  if (spec.edge_channels && centers(0) > 1.0 / gammas(0)) {
    Channel lp = make_gaussian_channel(0.0, 1.0 / (1.5 * centers(0)), 0.0, length, fs);
    lp.edge = true;
    channels.push_back(std::move(lp));
  }
  for (Index k = 0; k <= last; ++k)
    channels.push_back(make_gaussian_channel(centers(k), gammas(k), slopes(k), length, fs));
  if (spec.edge_channels && nyquist - centers(last) > 1.0 / gammas(last)) {
    Channel hp =
        make_gaussian_channel(nyquist, 1.0 / (1.5 * (nyquist - centers(last))), 0.0, length, fs);
    hp.edge = true;
    channels.push_back(std::move(hp));
  }
  return FilterBank(spec, length, std::move(channels));
}

Index padded_length(Index length, Index decimation) {
  if (decimation < 1) throw ParameterError("decimation must be >= 1");
  const Index frames = (length + decimation - 1) / decimation;
  return decimation * next_fast_size(std::max<Index>(frames, 1));
}

RealSignal zero_pad(const RealSignal& s, Index length) {
  if (length < s.length()) throw ParameterError("zero_pad: target shorter than signal");
  RealSignal out;
  out.sample_rate = s.sample_rate;
  out.samples = Eigen::ArrayXd::Zero(length);
  out.samples.head(s.length()) = s.samples;
  return out;
}

Eigen::VectorXcd signal_spectrum(const RealSignal& s) {
  return detail::fft(Eigen::VectorXd(s.samples.matrix()));
}

Eigen::ArrayXcd analyze_channel(const Channel& channel, const Eigen::VectorXcd& spectrum,
                                Index stride, const ResponseWeight& weight) {
  const Index length = spectrum.size();
  if (stride < 1 || length % stride != 0)
    throw ParameterError("analyze_channel: stride must divide the signal length");
  const Index frames = length / stride;
  Eigen::VectorXcd folded = Eigen::VectorXcd::Zero(frames);
  for_each_sample(channel, length, frames, [&](Index t, Index il, Index in) {
    Complex h = channel.response(t);
    if (weight) h *= std::conj(weight(channel.gamma * (channel.frequency(t) - channel.center)));
    folded(in) += spectrum(il) * h;
  });
  return detail::ifft(folded).array() / static_cast<double>(stride);
}

ComplexGrid analyze(const FilterBank& fb, const RealSignal& s) {
  require_length(fb, s);
  const Eigen::VectorXcd spectrum = signal_spectrum(s);
  ComplexGrid c(fb.frames(), fb.channels());
  for (Index k = 0; k < fb.channels(); ++k)
    c.col(k) = analyze_channel(fb.channel(k), spectrum, fb.decimation());
  return c;
}

RealSignal frame_operator_apply(const FilterBank& fb, const RealSignal& s) {
  require_length(fb, s);
  return RealSignal{real_ifft(frame_operator_spectral(fb, signal_spectrum(s))), s.sample_rate};
}

RealSignal adjoint(const FilterBank& fb, const ComplexGrid& c) {
  if (c.rows() != fb.frames() || c.cols() != fb.channels())
    throw ParameterError("coefficient grid does not match filter bank dimensions");
  return RealSignal{real_ifft(adjoint_spectral(fb, c)), fb.sample_rate()};
}

RealSignal synthesize(const FilterBank& fb, const ComplexGrid& c, const SynthesisOptions& options,
                      SynthesisInfo* info) {
  if (c.rows() != fb.frames() || c.cols() != fb.channels())
    throw ParameterError("coefficient grid does not match filter bank dimensions");
  SynthesisInfo local;
  const Eigen::VectorXcd x = pcg_solve(fb, adjoint_spectral(fb, c), options, local);
  if (info) *info = local;
  return RealSignal{real_ifft(x), fb.sample_rate()};
}

FrameBounds estimate_frame_bounds(const FilterBank& fb, int iterations) {
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> normal;
  Eigen::VectorXd start(fb.length());
  for (Index i = 0; i < start.size(); ++i) start(i) = normal(rng);
  const Eigen::VectorXcd x0 = detail::fft(start);

  FrameBounds bounds;
  Eigen::VectorXcd x = x0 / std::sqrt(inner(x0, x0));
  for (int i = 0; i < iterations; ++i) {
    Eigen::VectorXcd y = frame_operator_spectral(fb, x);
    bounds.upper = inner(x, y);
    x = y / std::sqrt(inner(y, y));
  }
  bounds.upper = inner(x, frame_operator_spectral(fb, x));

  SynthesisOptions opts;
  opts.max_iterations = 1000;
  x = x0 / std::sqrt(inner(x0, x0));
  try {
    SynthesisInfo info;
    for (int i = 0; i < iterations; ++i) {
      Eigen::VectorXcd y = pcg_solve(fb, x, opts, info);
      // Anti-Hermitian rounding noise lies in the null space of S; keep it out.
      hermitian_part(y);
      x = y / std::sqrt(inner(y, y));
    }
    bounds.lower = inner(x, frame_operator_spectral(fb, x));
  } catch (const ConvergenceError&) {
    bounds.lower = 0.0;
  }
  bounds.lower = std::min(bounds.lower, bounds.upper);
  return bounds;
}

double redundancy(const FilterBank& fb) noexcept {
  return 2.0 * static_cast<double>(fb.channels()) / static_cast<double>(fb.decimation());
}

}  // namespace fbpghi
