#include "fbpghi/gradient.hpp"
#include "fbpghi/presets.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace fbpghi;
using Catch::Approx;
using constants::pi;
using constants::two_pi;

namespace {

FilterBankSpec linear_spec(double spacing, double bandwidth, Index a, double fs = 44100.0) {
  FilterBankSpec spec;
  spec.scale.kind = ScaleKind::linear;
  spec.sample_rate = fs;
  spec.fmin = 0.0;
  spec.fmax = fs / 2;
  spec.bins = 1.0 / spacing;
  spec.bw = bandwidth;
  spec.decimation = a;
  return spec;
}

// Shorter FB(3)-like bank: constant-Q on 10 ln f, 4 bins per unit, bw 1/2.
FilterBankSpec constant_q_spec(Index a) {
  FilterBankSpec spec = preset_filterbank(3);
  spec.decimation = a;
  return spec;
}

RealSignal gaussian_pulse(Index length, double t0, double width, double freq, double fs) {
  Eigen::ArrayXd s(length);
  for (Index l = 0; l < length; ++l) {
    const double t = static_cast<double>(l) / fs - t0;
    s(l) = std::exp(-pi * t * t / (width * width)) * std::cos(two_pi * freq * t);
  }
  return RealSignal{s, fs};
}

RealSignal impulse(Index length, Index at, double fs) {
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(length);
  s(at) = 1.0;
  return RealSignal{s, fs};
}

// Raised-cosine fade in and out over `ramp` seconds; avoids the click at the period boundary.
Eigen::ArrayXd taper(Eigen::ArrayXd x, double fs, double ramp) {
  const Index length = x.size();
  const double duration = static_cast<double>(length) / fs;
  for (Index l = 0; l < length; ++l) {
    const double t = std::min(static_cast<double>(l) / fs, duration - static_cast<double>(l) / fs);
    if (t < ramp) x(l) *= 0.5 - 0.5 * std::cos(pi * t / ramp);
  }
  return x;
}

// Largest |x - y| relative to the largest |y| over the selected cells.
double masked_relative_deviation(const RealGrid& x, const RealGrid& y, const BoolGrid& mask) {
  const double num = (mask.cast<double>() * (x - y).abs()).maxCoeff();
  const double den = (mask.cast<double>() * y.abs()).maxCoeff();
  return num / den;
}

}  // namespace

TEST_CASE("log_magnitude", "[gradient]") {
  SECTION("unit magnitude gives zeros") {
    const MagnitudeGrid m = MagnitudeGrid::Ones(5, 4);
    CHECK((log_magnitude(m) == 0.0).all());
  }
  SECTION("floor is active for zeros") {
    MagnitudeGrid m = MagnitudeGrid::Ones(3, 3);
    m(1, 1) = 0.0;
    const RealGrid l = log_magnitude(m, 1e-10);
    CHECK(l(1, 1) == Approx(std::log(1e-10)));
    CHECK(std::isfinite(l(1, 1)));
  }
  SECTION("scaling shifts uniformly") {
    MagnitudeGrid m = MagnitudeGrid::Random(6, 5).abs() + 0.1;
    const RealGrid diff = log_magnitude(3.0 * m) - log_magnitude(m);
    CHECK((diff - std::log(3.0)).abs().maxCoeff() < 1e-14);
  }
  SECTION("errors") {
    CHECK_THROWS_AS(log_magnitude(MagnitudeGrid::Zero(3, 3)), DegenerateInputError);
    CHECK_THROWS_AS(log_magnitude(MagnitudeGrid::Ones(3, 3), 0.0), ParameterError);
    CHECK_THROWS_AS(log_magnitude(MagnitudeGrid::Ones(3, 3), 1.0), ParameterError);
    MagnitudeGrid neg = MagnitudeGrid::Ones(3, 3);
    neg(0, 0) = -1.0;
    CHECK_THROWS_AS(log_magnitude(neg), ParameterError);
  }
}

TEST_CASE("diff_time", "[gradient]") {
  const Index a = 7;
  const double fs = 1000.0;
  const double h = a / fs;
  RealGrid ramp(9, 3), quad(9, 3);
  for (Index n = 0; n < 9; ++n) {
    ramp.row(n).setConstant(n * h);
    quad.row(n).setConstant((n * h) * (n * h));
  }
  SECTION("linear ramp in physical time") {
    CHECK((diff_time(ramp, a, fs) - 1.0).abs().maxCoeff() < 1e-12);
  }
  SECTION("constant") {
    CHECK(diff_time(RealGrid::Constant(5, 2, 3.5), a, fs).abs().maxCoeff() == 0.0);
  }
  SECTION("quadratic is exact in the interior") {
    const RealGrid d = diff_time(quad, a, fs);
    for (Index n = 1; n < 8; ++n) CHECK(d(n, 1) == Approx(2 * n * h).epsilon(1e-12));
  }
  SECTION("too few frames") { CHECK_THROWS_AS(diff_time(RealGrid::Zero(2, 3), a, fs), ParameterError); }
}

TEST_CASE("diff_freq", "[gradient]") {
  Eigen::ArrayXd centers(6);
  centers << 10.0, 11.0, 13.5, 14.0, 20.0, 31.0;
  SECTION("linear in xi is exact for any spacing") {
    RealGrid v(2, 6);
    v.row(0) = 2.5 * centers.transpose();
    v.row(1) = -0.75 * centers.transpose() + 4.0;
    const RealGrid d = diff_freq(v, centers);
    CHECK((d.row(0) - 2.5).abs().maxCoeff() < 1e-12);
    CHECK((d.row(1) + 0.75).abs().maxCoeff() < 1e-12);
  }
  SECTION("constant") { CHECK(diff_freq(RealGrid::Constant(3, 6, -2.0), centers).abs().maxCoeff() == 0.0); }
  SECTION("uniform spacing reduces to the centered difference") {
    const Eigen::ArrayXd uniform = Eigen::ArrayXd::LinSpaced(6, 100.0, 150.0);
    const RealGrid v = RealGrid::Random(4, 6);
    const RealGrid d = diff_freq(v, uniform);
    for (Index k = 1; k < 5; ++k)
      CHECK((d.col(k) - (v.col(k + 1) - v.col(k - 1)) / 20.0).abs().maxCoeff() < 1e-14);
  }
  SECTION("errors") {
    Eigen::ArrayXd bad = centers;
    bad(3) = 13.0;
    CHECK_THROWS_AS(diff_freq(RealGrid::Zero(2, 6), bad), ParameterError);
    CHECK_THROWS_AS(diff_freq(RealGrid::Zero(2, 2), centers.head(2)), ParameterError);
    CHECK_THROWS_AS(diff_freq(RealGrid::Zero(2, 5), centers), ParameterError);
  }
}

TEST_CASE("gamma_derivative", "[gradient]") {
  const Eigen::ArrayXd centers = Eigen::ArrayXd::LinSpaced(50, 1.0, 8.0).exp() * 30.0;
  SECTION("constant gamma") {
    CHECK(gamma_derivative(Eigen::ArrayXd::Constant(50, 0.01), centers).abs().maxCoeff() == 0.0);
  }
  SECTION("constant-Q") {
    const double c = 20.0;
    const Eigen::ArrayXd gp = gamma_derivative(c / centers, centers);
    for (Index k = 1; k < 49; ++k) {
      const double exact = -c / (centers(k) * centers(k));
      const double spacing = std::max(centers(k + 1) - centers(k), centers(k) - centers(k - 1));
      const double bound = 2.0 * std::pow(spacing / centers(k), 2);
      CHECK(std::abs(gp(k) - exact) / std::abs(exact) < bound);
    }
  }
  SECTION("linear gamma") {
    const Eigen::ArrayXd gp = gamma_derivative(1e-3 + 2e-6 * centers, centers);
    CHECK((gp - 2e-6).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("estimate_phase_gradients basics", "[gradient]") {
  Eigen::ArrayXd centers(5), gammas(5);
  centers << 100, 200, 400, 800, 1600;
  gammas = 20.0 / centers;
  const Index a = 10;
  const double fs = 8000.0;

  SECTION("constant magnitude gives the frequency offset only") {
    const GradientField g = estimate_phase_gradients(MagnitudeGrid::Ones(6, 5), centers, gammas, a, fs);
    const Eigen::ArrayXd gp = gamma_derivative(gammas, centers);
    // For unit-energy filters the gamma^(1/2) factor contributes its own log-derivative.
    const RealGrid half_log_gamma = (0.5 * gammas.log()).transpose().replicate(1, 1);
    const Eigen::ArrayXd dk = diff_freq(half_log_gamma, centers).row(0).transpose();
    for (Index k = 0; k < 5; ++k) {
      const double expected = two_pi * centers(k) + gp(k) / (2 * std::pow(gammas(k), 3)) +
                              dk(k) / (gammas(k) * gammas(k));
      for (Index n = 0; n < 6; ++n) CHECK(g.d_time(n, k) == Approx(expected).epsilon(1e-12));
    }
    CHECK(g.d_freq.abs().maxCoeff() == 0.0);
  }
  SECTION("invariant under magnitude scaling") {
    const MagnitudeGrid m = MagnitudeGrid::Random(8, 5).abs() + 0.01;
    const GradientField g1 = estimate_phase_gradients(m, centers, gammas, a, fs);
    const GradientField g2 = estimate_phase_gradients(1e3 * m, centers, gammas, a, fs);
    CHECK(((g1.d_time - g2.d_time) / g1.d_time.abs()).abs().maxCoeff() < 1e-12);
    CHECK((g1.d_freq - g2.d_freq).abs().maxCoeff() <= 1e-9 * g1.d_freq.abs().maxCoeff());
  }
  SECTION("dimension checks") {
    CHECK_THROWS_AS(estimate_phase_gradients(MagnitudeGrid::Ones(6, 4), centers, gammas, a, fs),
                    ParameterError);
    CHECK_THROWS_AS(estimate_phase_gradients(MagnitudeGrid::Zero(6, 5), centers, gammas, a, fs),
                    DegenerateInputError);
  }
}

TEST_CASE("estimator recovers a tone's frequency on a constant-bandwidth bank", "[gradient]") {
  const double fs = 44100.0;
  const FilterBankSpec spec = linear_spec(50.0, 100.0, 16);
  // fs / L = 6.25 Hz puts every center on a DFT bin, so the tones are periodic.
  const Index length = 7056;
  const FilterBank fb = build_filterbank(spec, length);
  for (Index k0 : {20, 60, 200}) {
    const double xi = fb.channel(k0).center;
    const ComplexGrid c = analyze(fb, testing::tone(length, xi, fs, 0.3));
    const GradientField g = estimate_phase_gradients(c.abs(), fb);
    for (Index n = 0; n < fb.frames(); ++n)
      CHECK(std::abs(g.d_time(n, k0) - two_pi * xi) < 0.01 * two_pi * xi);
  }
}

TEST_CASE("estimated frequency derivative vanishes on a pulse ridge", "[gradient]") {
  const double fs = 44100.0;
  const FilterBankSpec spec = linear_spec(25.0, 100.0, 8);
  const Index length = 8 * 1024;
  const FilterBank fb = build_filterbank(spec, length);
  const Index k0 = 80;
  const Index n0 = 512;
  const double t0 = static_cast<double>(n0 * 8) / fs;
  const double width = fb.channel(k0).gamma;
  const ComplexGrid c = analyze(fb, gaussian_pulse(length, t0, width, fb.channel(k0).center, fs));
  const GradientField g = estimate_phase_gradients(c.abs(), fb);
  // The slope two frames off the ridge sets the scale.
  CHECK(std::abs(g.d_freq(n0, k0)) < 1e-6 * std::abs(g.d_freq(n0 + 2, k0)));
}

TEST_CASE("oracle gradients of an impulse", "[gradient]") {
  // c(x, xi) = gamma^-1 exp(-pi (x - t0)^2 / gamma^2) exp(2 pi i xi (x - t0)):
  // d_time = 2 pi xi and d_freq = 2 pi (x - t0) exactly, for any gamma(xi).
  const double fs = 44100.0;
  const FilterBankSpec spec = constant_q_spec(20);
  const Index length = 20 * 1024;
  const FilterBank fb = build_filterbank(spec, length);
  const Index at = length / 2;
  const double t0 = static_cast<double>(at) / fs;
  const OracleGradients o = oracle_phase_gradients(impulse(length, at, fs), fb);
  const RealGrid mag = analyze(fb, impulse(length, at, fs)).abs();

  double worst_time = 0.0, worst_freq = 0.0;
  Index cells = 0;
  const double duration = static_cast<double>(length) / fs;
  for (Index k = 0; k < fb.channels(); ++k) {
    // Channels whose time spread exceeds the period alias onto themselves.
    if (fb.channel(k).gamma > duration / 8) continue;
    const double xi = fb.channel(k).center;
    for (Index n = 0; n < fb.frames(); ++n) {
      if (mag(n, k) < 1e-2 * mag.col(k).maxCoeff()) continue;
      const double x = static_cast<double>(n * 20) / fs;
      worst_time = std::max(worst_time, std::abs(o.field.d_time(n, k) - two_pi * xi) / (two_pi * std::max(xi, 1.0)));
      worst_freq = std::max(worst_freq, std::abs(o.field.d_freq(n, k) - two_pi * (x - t0)) /
                                            (two_pi * fb.channel(k).gamma));
      ++cells;
    }
  }
  CHECK(cells > 1000);
  CHECK(worst_time < 1e-6);
  CHECK(worst_freq < 1e-6);
}

TEST_CASE("oracle forms agree", "[gradient]") {
  const double fs = 44100.0;
  const FilterBankSpec spec = preset_filterbank(5);
  const Index length = padded_length(8192, spec.decimation);
  const FilterBank fb = build_filterbank(spec, length);
  const RealSignal s = testing::random_signal(length, 17);
  const OracleGradients o = oracle_phase_gradients(s, fb);
  const BoolGrid mask = o.reliable && (analyze(fb, s).abs() > 1e-3 * analyze(fb, s).abs().maxCoeff());
  CHECK(masked_relative_deviation(o.field.d_time, o.direct.d_time, mask) < 1e-9);
  CHECK(masked_relative_deviation(o.field.d_freq, o.direct.d_freq, mask) < 1e-9);
  CHECK(o.reliable.count() > 0);
  (void)fs;
}

TEST_CASE("oracle reduces to the constant-bandwidth relationship", "[gradient]") {
  const double fs = 44100.0;
  const FilterBankSpec spec = linear_spec(40.0, 120.0, 8);
  const Index length = 8 * 1024;
  const FilterBank fb = build_filterbank(spec, length);
  CHECK(fb.gamma_slopes().abs().maxCoeff() == 0.0);
  const RealSignal s = testing::exponential_chirp(length, 800.0, 6000.0, fs);
  const OracleGradients o = oracle_phase_gradients(s, fb);
  for (Index k = 0; k < fb.channels(); ++k) {
    const double g = fb.channel(k).gamma;
    for (Index n = 0; n < fb.frames(); ++n) {
      if (!o.reliable(n, k)) continue;
      const double classical = two_pi * fb.channel(k).center + o.dlogm_freq(n, k) / (g * g);
      REQUIRE(o.field.d_time(n, k) == Approx(classical).epsilon(1e-12));
      REQUIRE(o.field.d_freq(n, k) == Approx(-g * g * o.dlogm_time(n, k)).margin(1e-12));
    }
  }
}

TEST_CASE("oracle matches finite differences on a chirp", "[gradient]") {
  const double fs = 44100.0;
  const FilterBankSpec spec = constant_q_spec(20);
  const Index length = padded_length(11025, 20);
  const FilterBank fb = build_filterbank(spec, length);
  const RealSignal s = testing::exponential_chirp(length, 500.0, 15000.0, fs);
  const Eigen::VectorXcd spectrum = signal_spectrum(s);
  const OracleGradients o = oracle_phase_gradients(s, fb);
  const RealGrid mag = analyze(fb, s).abs();
  const double floor = 1e-2 * mag.maxCoeff();
  const Index lo = fb.frames() / 8, hi = fb.frames() - fb.frames() / 8;

  SECTION("time direction, dense in time") {
    double worst = 0.0;
    Index cells = 0;
    for (Index k = 0; k < fb.channels(); ++k) {
      if ((mag.col(k).segment(lo, hi - lo) <= floor).all()) continue;
      const Eigen::ArrayXd fd = testing::dense_phase_time_derivative(fb.channel(k), spectrum, fs);
      for (Index n = lo; n < hi; ++n) {
        if (mag(n, k) <= floor) continue;
        const double ref = fd(n * 20);
        worst = std::max(worst, std::abs(o.field.d_time(n, k) - ref) / std::abs(ref));
        ++cells;
      }
    }
    CHECK(cells > 500);
    CHECK(worst < 1e-2);
  }
  SECTION("frequency direction, off-grid channels") {
    double worst = 0.0;
    Index cells = 0;
    for (Index k = 0; k < fb.channels(); k += 3) {
      const Channel& ch = fb.channel(k);
      if (ch.edge || (mag.col(k).segment(lo, hi - lo) <= floor).all()) continue;
      const Eigen::ArrayXd fd = testing::phase_freq_derivative(spec, ch.center, 1e-4 / ch.gamma, spectrum, 20);
      for (Index n = lo; n < hi; ++n) {
        if (mag(n, k) <= floor) continue;
        // Relative to the channel's time resolution gamma.
        worst = std::max(worst, std::abs(o.field.d_freq(n, k) - fd(n)) /
                                    std::max(std::abs(fd(n)), two_pi * ch.gamma));
        ++cells;
      }
    }
    CHECK(cells > 100);
    CHECK(worst < 1e-2);
  }
  SECTION("log-magnitude time derivative") {
    double worst = 0.0;
    for (Index k = 0; k < fb.channels(); k += 5) {
      if ((mag.col(k).segment(lo, hi - lo) <= floor).all()) continue;
      const Eigen::ArrayXd dense = analyze_channel(fb.channel(k), spectrum, 1).abs().log();
      for (Index n = lo; n < hi; ++n) {
        if (mag(n, k) <= floor) continue;
        const Index l = n * 20;
        const double fd = (dense(l + 1) - dense(l - 1)) * fs / 2.0;
        const double scale = std::max(std::abs(fd), 1.0 / fb.channel(k).gamma);
        worst = std::max(worst, std::abs(o.dlogm_time(n, k) - fd) / scale);
      }
    }
    CHECK(worst < 1e-2);
  }
}

TEST_CASE("oracle marks low-magnitude cells", "[gradient]") {
  const double fs = 44100.0;
  const FilterBankSpec spec = linear_spec(40.0, 120.0, 8);
  const Index length = 8 * 512;
  const FilterBank fb = build_filterbank(spec, length);
  const OracleGradients o = oracle_phase_gradients(testing::tone(length, 1000.0, fs), fb, 1e-3);
  const RealGrid mag = analyze(fb, testing::tone(length, 1000.0, fs)).abs();
  CHECK((o.reliable == (mag >= 1e-3 * mag.maxCoeff())).all());
  CHECK((o.reliable || (o.field.d_time == 0.0 && o.field.d_freq == 0.0)).all());
  CHECK(o.field.d_time.allFinite());
  CHECK_THROWS_AS(oracle_phase_gradients(testing::tone(length - 8, 1000.0, fs), fb), ParameterError);
}

TEST_CASE("estimator and oracle agree on a constant-bandwidth bank", "[gradient]") {
  const double fs = 44100.0;
  const FilterBankSpec spec = linear_spec(20.0, 200.0, 4);
  const Index length = 4 * 2048;
  const FilterBank fb = build_filterbank(spec, length);
  const Eigen::ArrayXd samples =
      taper(testing::exponential_chirp(length, 1000.0, 4000.0, fs).samples +
                0.5 * testing::tone(length, 9000.0, fs).samples,
            fs, 0.02) +
      gaussian_pulse(length, 0.09, 0.004, 6000.0, fs).samples;
  const RealSignal s{samples, fs};
  const ComplexGrid c = analyze(fb, s);
  const RealGrid mag = c.abs();
  const GradientField est = estimate_phase_gradients(mag, fb);
  const OracleGradients o = oracle_phase_gradients(s, fb);
  BoolGrid mask = mag > 1e-2 * mag.maxCoeff();
  mask.topRows(2).setConstant(false);
  mask.bottomRows(2).setConstant(false);
  mask.leftCols(2).setConstant(false);
  mask.rightCols(2).setConstant(false);
  CHECK(masked_relative_deviation(est.d_time, o.field.d_time, mask) < 5e-2);
  CHECK(masked_relative_deviation(est.d_freq, o.field.d_freq, mask) < 5e-2);
}
