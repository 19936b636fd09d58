#include "fbpghi/filterbank.hpp"
#include "fbpghi/presets.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

using namespace fbpghi;
using Catch::Approx;

namespace {

FilterBankSpec linear_spec(double fs, double spacing, double bandwidth, Index a) {
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

double dot(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y) { return (x * y).sum(); }

}  // namespace

TEST_CASE("linear-scale filters are shifts of one another", "[filterbank]") {
  const Index length = 4096;
  const FilterBank fb = build_filterbank(linear_spec(4096.0, 16.0, 32.0, 4), length);
  const Eigen::ArrayXd g0 = fb.response(0);
  CHECK(g0.maxCoeff() == Approx(1.0));
  for (Index k = 1; k < fb.channels(); ++k) {
    const Eigen::ArrayXd gk = fb.response(k);
    const Index shift = 16 * k;
    double worst = 0.0;
    for (Index j = 0; j < length; ++j)
      worst = std::max(worst, std::abs(gk((j + shift) % length) - g0(j)));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("build_filterbank metadata", "[filterbank]") {
  SECTION("ERB 1 bin per unit") {
    const FilterBankSpec spec = preset_filterbank(1);
    const Index length = padded_length(44100, spec.decimation);
    CHECK(length % 8 == 0);
    const FilterBank fb = build_filterbank(spec, length);
    CHECK(fb.channels() == 43);
    CHECK(fb.frames() == length / 8);
    CHECK(redundancy(fb) == Approx(10.75));
    for (Index k = 0; k < fb.channels(); ++k) {
      CHECK((fb.channel(k).response >= 0).all());
      CHECK(fb.channel(k).response.maxCoeff() == Approx(1.0).epsilon(1e-3));
    }
  }
  SECTION("constant-Q bank gains a lowpass completion channel") {
    const FilterBank fb = build_filterbank(preset_filterbank(3), 44100);
    CHECK(fb.channels() == 265);
    CHECK(fb.channel(0).edge);
    CHECK(fb.centers()(0) == 0.0);
    CHECK(fb.centers()(1) == 30.0);
    CHECK(std::abs(redundancy(fb) - 26.40) <= 0.5);
  }
  SECTION("three channels is the minimum") {
    FilterBankSpec spec = linear_spec(8000.0, 2000.0, 2000.0, 2);
    const FilterBank fb = build_filterbank(spec, 64);
    CHECK(fb.channels() == 3);
  }
  SECTION("decimation must divide the length") {
    CHECK_THROWS_AS(build_filterbank(preset_filterbank(2), 44100 + 1), ConfigurationError);
  }
  SECTION("K = a gives redundancy 2") {
    const FilterBank fb = build_filterbank(linear_spec(8000.0, 1000.0, 1000.0, 5), 400);
    CHECK(fb.channels() == 5);
    CHECK(redundancy(fb) == Approx(2.0));
  }
}

TEST_CASE("analysis", "[filterbank]") {
  const FilterBankSpec spec = preset_filterbank(1);
  const Index length = padded_length(11025, spec.decimation);
  const FilterBank fb = build_filterbank(spec, length);

  SECTION("zero signal") {
    const ComplexGrid c = analyze(fb, RealSignal{Eigen::ArrayXd::Zero(length), 44100.0});
    CHECK(c.rows() == fb.frames());
    CHECK(c.cols() == fb.channels());
    CHECK(c.abs().maxCoeff() == 0.0);
  }
  SECTION("a tone at a channel center peaks in that channel at every frame") {
    const double bin = 44100.0 / static_cast<double>(length);
    for (Index k0 : {10, 20, 30}) {
      const double f0 = std::round(fb.centers()(k0) / bin) * bin;
      const ComplexGrid c = analyze(fb, testing::tone(length, f0));
      for (Index n = 0; n < c.rows(); ++n) {
        Index argmax;
        c.row(n).abs().maxCoeff(&argmax);
        CHECK(argmax == k0);
      }
    }
  }
  SECTION("decimation commutes with subsampling") {
    const RealSignal s = testing::random_signal(length, 3);
    const FilterBank fb2 = fb.with_decimation(2 * spec.decimation);
    const ComplexGrid ca = analyze(fb, s);
    const ComplexGrid c2a = analyze(fb2, s);
    double worst = 0.0;
    for (Index n = 0; n < c2a.rows(); ++n)
      worst = std::max(worst, (ca.row(2 * n) - c2a.row(n)).abs().maxCoeff());
    CHECK(worst / ca.abs().maxCoeff() < 1e-12);
  }
  SECTION("linearity") {
    const RealSignal x = testing::random_signal(length, 4);
    const RealSignal y = testing::random_signal(length, 5);
    const RealSignal z{2.5 * x.samples - 0.75 * y.samples, 44100.0};
    const ComplexGrid lhs = analyze(fb, z);
    const ComplexGrid rhs = 2.5 * analyze(fb, x) - 0.75 * analyze(fb, y);
    CHECK(testing::relative_error(lhs, rhs) < 1e-12);
  }
  SECTION("length mismatch") {
    CHECK_THROWS_AS(analyze(fb, testing::random_signal(length - 8, 1)), ParameterError);
  }
  SECTION("matches direct inner products with the time-domain filter") {
    // Brute force c[n,k] = sum_l s[l] conj(g_k[l - n a]) with g_k = IDFT of the response.
    const Index small = 256;
    FilterBankSpec lin = linear_spec(256.0, 16.0, 24.0, 4);
    const FilterBank fbs = build_filterbank(lin, small);
    const RealSignal s = testing::random_signal(small, 8, 256.0);
    const ComplexGrid c = analyze(fbs, s);
    for (Index k : {0, 3, 7}) {
      const Eigen::ArrayXd resp = fbs.response(k);
      Eigen::ArrayXcd g = unitary_dft(resp.cast<Complex>(), Direction::inverse) /
                          std::sqrt(static_cast<double>(small));
      for (Index n : {0, 5, 31}) {
        Complex acc = 0.0;
        for (Index l = 0; l < small; ++l)
          acc += s.samples(l) * std::conj(g(((l - n * 4) % small + small) % small));
        CHECK(std::abs(acc - c(n, k)) < 1e-10);
      }
    }
  }
}

TEST_CASE("frame operator", "[filterbank]") {
  const FilterBankSpec spec = preset_filterbank(2);
  const Index length = padded_length(8820, spec.decimation);
  const FilterBank fb = build_filterbank(spec, length);
  const RealSignal x = testing::random_signal(length, 21);
  const RealSignal y = testing::random_signal(length, 22);

  SECTION("<Sx, x> equals the coefficient energy") {
    const double lhs = dot(frame_operator_apply(fb, x).samples, x.samples);
    const double rhs = analyze(fb, x).abs2().sum();
    CHECK(std::abs(lhs - rhs) / rhs < 1e-10);
  }
  SECTION("self-adjoint") {
    const double lhs = dot(frame_operator_apply(fb, x).samples, y.samples);
    const double rhs = dot(x.samples, frame_operator_apply(fb, y).samples);
    CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-10);
  }
  SECTION("adjoint of the analysis map") {
    const ComplexGrid c = analyze(fb, y);
    const double lhs = (analyze(fb, x) * c.conjugate()).sum().real();
    const double rhs = dot(x.samples, adjoint(fb, c).samples);
    CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-10);
  }
  SECTION("without decimation S is the diagonal symbol") {
    const FilterBank fb1 = fb.with_decimation(1);
    const Eigen::ArrayXd sx = frame_operator_apply(fb1, x).samples;
    // Independent multiplier: sum_k (g_k[j]^2 + g_k[-j]^2) / 2 from the dense responses.
    Eigen::ArrayXd symbol = Eigen::ArrayXd::Zero(length);
    for (Index k = 0; k < fb1.channels(); ++k) {
      const Eigen::ArrayXd g = fb1.response(k);
      for (Index j = 0; j < length; ++j)
        symbol(j) += 0.5 * (g(j) * g(j) + g((length - j) % length) * g((length - j) % length));
    }
    Eigen::ArrayXcd xs = unitary_dft(x.samples.cast<Complex>(), Direction::forward);
    const Eigen::ArrayXd expected = unitary_dft(xs * symbol, Direction::inverse).real();
    CHECK(testing::relative_error(sx, expected) < 1e-12);
  }
}

TEST_CASE("synthesis", "[filterbank]") {
  const FilterBankSpec spec = preset_filterbank(2);
  const Index length = padded_length(22050, spec.decimation);
  const FilterBank fb = build_filterbank(spec, length);

  SECTION("perfect reconstruction") {
    const RealSignal s = testing::random_signal(length, 31);
    SynthesisInfo info;
    const RealSignal r = synthesize(fb, analyze(fb, s), {}, &info);
    CHECK(testing::relative_error(r.samples, s.samples) <= 1e-6);
    CHECK(info.relative_residual <= 1e-10);
  }
  SECTION("zero grid") {
    const ComplexGrid zero = ComplexGrid::Zero(fb.frames(), fb.channels());
    CHECK(synthesize(fb, zero).samples.abs().maxCoeff() == 0.0);
  }
  SECTION("linearity") {
    const ComplexGrid c1 = analyze(fb, testing::random_signal(length, 32));
    ComplexGrid c2 = analyze(fb, testing::random_signal(length, 33));
    c2 *= Complex(0.3, -1.1);  // not consistent: exercises the projection part too
    const double alpha = -1.7;
    const Eigen::ArrayXd lhs = synthesize(fb, alpha * c1 + c2).samples;
    const Eigen::ArrayXd rhs = alpha * synthesize(fb, c1).samples + synthesize(fb, c2).samples;
    CHECK(testing::relative_error(lhs, rhs) < 1e-9);
  }
  SECTION("dimension mismatch") {
    CHECK_THROWS_AS(synthesize(fb, ComplexGrid::Zero(3, 3)), ParameterError);
  }
  SECTION("non-convergence is reported with the residual") {
    SynthesisOptions opts;
    opts.max_iterations = 1;
    opts.tolerance = 1e-30;
    try {
      synthesize(fb, analyze(fb, testing::random_signal(length, 34)), opts);
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.residual() > 0.0);
    }
  }
}

TEST_CASE("frame bounds", "[filterbank]") {
  SECTION("tight bank with a compensating channel") {
    const Index length = 512;
    const FilterBank base = build_filterbank(linear_spec(512.0, 16.0, 24.0, 1), length);
    // Full-band channel h with h[j]^2 = max(symbol) - symbol[j] makes the symbol flat.
    const Eigen::ArrayXd symbol = base.diagonal_symbol();
    std::vector<Channel> channels = base.channel_list();
    Channel flat;
    flat.center = 0.0;
    flat.gamma = 1.0;
    flat.bin_hz = 1.0;
    flat.first_bin = 0;
    flat.response = (symbol.maxCoeff() - symbol).max(0.0).sqrt();
    channels.push_back(flat);
    const FilterBank tight(base.spec(), length, channels);
    const FrameBounds b = estimate_frame_bounds(tight);
    CHECK(b.lower > 0.0);
    CHECK(std::abs(b.upper - b.lower) / b.upper < 1e-6);
    CHECK(b.upper == Approx(symbol.maxCoeff()).epsilon(1e-9));
  }
  SECTION("Rayleigh quotients of random signals lie within the bounds") {
    const FilterBankSpec spec = preset_filterbank(2);
    const Index length = padded_length(4410, spec.decimation);
    const FilterBank fb = build_filterbank(spec, length);
    const FrameBounds b = estimate_frame_bounds(fb);
    CHECK(b.lower > 0.0);
    CHECK(b.lower <= b.upper);
    for (int i = 0; i < 20; ++i) {
      const RealSignal s = testing::random_signal(length, 100 + i);
      const double q = analyze(fb, s).abs2().sum() / s.samples.square().sum();
      CHECK(q >= b.lower * (1 - 1e-3));
      CHECK(q <= b.upper * (1 + 1e-3));
    }
  }
  SECTION("doubling the decimation does not raise the lower bound") {
    const FilterBankSpec spec = preset_filterbank(1);
    const Index length = 8 * 640;
    const FilterBank fb = build_filterbank(spec, length);
    const FrameBounds b1 = estimate_frame_bounds(fb);
    const FrameBounds b2 = estimate_frame_bounds(fb.with_decimation(16));
    CHECK(b2.lower <= b1.lower * (1 + 1e-6));
  }
}
