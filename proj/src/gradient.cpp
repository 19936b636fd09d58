#include "fbpghi/gradient.hpp"

#include <cmath>
#include <string>

namespace fbpghi {

namespace {

using constants::two_pi;

void require_same_shape(const MagnitudeGrid& m, Index channels, const char* what) {
  if (m.cols() != channels)
    throw ParameterError(std::string(what) + ": magnitude has " + std::to_string(m.cols()) +
                         " channels, expected " + std::to_string(channels));
}

}  // namespace

RealGrid log_magnitude(const MagnitudeGrid& m, double rel_floor) {
  if (!(rel_floor > 0 && rel_floor < 1))
    throw ParameterError("log_magnitude: rel_floor must lie in (0, 1)");
  validate_magnitude(m);
  const double peak = m.size() ? m.maxCoeff() : 0.0;
  if (!(peak > 0)) throw DegenerateInputError("log_magnitude: magnitude is identically zero");
  return m.max(rel_floor * peak).log();
}

RealGrid diff_time(const RealGrid& v, Index a, double sample_rate) {
  const Index n = v.rows();
  if (n < 3) throw ParameterError("diff_time: need at least 3 frames");
  if (a < 1 || !(sample_rate > 0)) throw ParameterError("diff_time: invalid step");
  const double h = static_cast<double>(a) / sample_rate;
  RealGrid d(n, v.cols());
  d.middleRows(1, n - 2) = (v.bottomRows(n - 2) - v.topRows(n - 2)) / (2 * h);
  d.row(0) = (v.row(1) - v.row(0)) / h;
  d.row(n - 1) = (v.row(n - 1) - v.row(n - 2)) / h;
  return d;
}

RealGrid diff_freq(const RealGrid& v, const Eigen::ArrayXd& centers) {
  const Index k = v.cols();
  if (k < 3) throw ParameterError("diff_freq: need at least 3 channels");
  if (centers.size() != k) throw ParameterError("diff_freq: centers do not match channels");
  const Eigen::ArrayXd step = centers.tail(k - 1) - centers.head(k - 1);
  if ((step <= 0).any()) throw ParameterError("diff_freq: centers must be strictly increasing");

  RealGrid forward(v.rows(), k - 1);
  for (Index j = 0; j < k - 1; ++j) forward.col(j) = (v.col(j + 1) - v.col(j)) / step(j);
  RealGrid d(v.rows(), k);
  d.col(0) = forward.col(0);
  d.col(k - 1) = forward.col(k - 2);
  d.middleCols(1, k - 2) = 0.5 * (forward.rightCols(k - 2) + forward.leftCols(k - 2));
  return d;
}

Eigen::ArrayXd gamma_derivative(const Eigen::ArrayXd& gammas, const Eigen::ArrayXd& centers) {
  return diff_freq(gammas.transpose(), centers).row(0).transpose();
}

GradientField estimate_phase_gradients(const MagnitudeGrid& m, const Eigen::ArrayXd& centers,
                                       const Eigen::ArrayXd& gammas, Index a, double sample_rate,
                                       double rel_floor) {
  return estimate_phase_gradients(m, centers, gammas, gamma_derivative(gammas, centers), a,
                                  sample_rate, rel_floor);
}

GradientField estimate_phase_gradients(const MagnitudeGrid& m, const Eigen::ArrayXd& centers,
                                       const Eigen::ArrayXd& gammas,
                                       const Eigen::ArrayXd& gamma_slopes, Index a,
                                       double sample_rate, double rel_floor) {
  const Index k = m.cols();
  require_same_shape(m, centers.size(), "estimate_phase_gradients");
  if (gammas.size() != k || gamma_slopes.size() != k)
    throw ParameterError("estimate_phase_gradients: gamma arrays do not match channels");
  if ((gammas <= 0).any()) throw ParameterError("estimate_phase_gradients: gammas must be positive");

  const RealGrid logm = log_magnitude(m, rel_floor);
  // Peak-normalized filters: the unit-energy magnitude is m * gamma^(1/2).
  const RealGrid logm_unit = logm.rowwise() + (0.5 * gammas.log()).transpose();
  const RealGrid dk = diff_freq(logm_unit, centers);
  const RealGrid dn = diff_time(logm, a, sample_rate);

  const Eigen::ArrayXd g2 = gammas.square();
  const Eigen::ArrayXd offset = two_pi * centers + gamma_slopes / (2 * g2 * gammas);
  GradientField out;
  out.d_time = (dk.rowwise() / g2.transpose()).rowwise() + offset.transpose();
  out.d_freq = -(dn.rowwise() * g2.transpose());
  return out;
}

GradientField estimate_phase_gradients(const MagnitudeGrid& m, const FilterBank& fb,
                                       double rel_floor) {
  require_same_shape(m, fb.channels(), "estimate_phase_gradients");
  if (m.rows() != fb.frames())
    throw ParameterError("estimate_phase_gradients: magnitude does not match frame count");
  Index first = 0;
  Index last = fb.channels() - 1;
  while (first <= last && fb.channel(first).edge) ++first;
  while (last >= first && fb.channel(last).edge) --last;

  Eigen::ArrayXd slopes = Eigen::ArrayXd::Zero(fb.channels());
  const Index inner = last - first + 1;
  if (inner >= 3)
    slopes.segment(first, inner) =
        gamma_derivative(fb.gammas().segment(first, inner), fb.centers().segment(first, inner));
  return estimate_phase_gradients(m, fb.centers(), fb.gammas(), slopes, fb.decimation(),
                                  fb.sample_rate(), rel_floor);
}

OracleGradients oracle_phase_gradients(const RealSignal& s, const FilterBank& fb,
                                       double rel_floor) {
  if (s.length() != fb.length())
    throw ParameterError("oracle_phase_gradients: signal length does not match filter bank");
  if (!(rel_floor > 0 && rel_floor < 1))
    throw ParameterError("oracle_phase_gradients: rel_floor must lie in (0, 1)");
  const Index n = fb.frames();
  const Index k = fb.channels();
  const Index a = fb.decimation();
  const Eigen::VectorXcd spectrum = signal_spectrum(s);

  // Spectral multipliers as functions of u = gamma (f - xi).
  const ResponseWeight time_weighted = [](double u) { return Complex(0.0, -u); };
  const ResponseWeight time2_weighted = [](double u) { return Complex(1.0 / two_pi - u * u, 0.0); };

  ComplexGrid v(n, k), r1(n, k), r2(n, k);
  for (Index j = 0; j < k; ++j) {
    const Channel& ch = fb.channel(j);
    v.col(j) = analyze_channel(ch, spectrum, a);
    r1.col(j) = analyze_channel(ch, spectrum, a, time_weighted);
    r2.col(j) = analyze_channel(ch, spectrum, a, time2_weighted);
  }
  const RealGrid mag = v.abs();
  const double peak = mag.size() ? mag.maxCoeff() : 0.0;

  OracleGradients out;
  out.reliable = peak > 0 ? BoolGrid(mag >= rel_floor * peak) : BoolGrid::Constant(n, k, false);
  for (GradientField* g : {&out.field, &out.direct}) {
    g->d_time = RealGrid::Zero(n, k);
    g->d_freq = RealGrid::Zero(n, k);
  }
  out.dlogm_time = RealGrid::Zero(n, k);
  out.dlogm_freq = RealGrid::Zero(n, k);

  for (Index j = 0; j < k; ++j) {
    const Channel& ch = fb.channel(j);
    const double xi = ch.center, g = ch.gamma, gp = ch.gamma_slope;
    for (Index i = 0; i < n; ++i) {
      if (!out.reliable(i, j)) continue;
      const Complex q1 = r1(i, j) / v(i, j);  // V_{T g0} / V
      const Complex q2 = r2(i, j) / v(i, j);  // V_{T^2 g0} / V
      // Log-magnitude derivatives; g0' = -2 pi T g0 and T g0' = -2 pi T^2 g0.
      const double lt = two_pi * q1.real() / g;
      const double lf = -gp / (2 * g) + two_pi * gp / g * q2.real() + two_pi * g * q1.imag();
      out.dlogm_time(i, j) = lt;
      out.dlogm_freq(i, j) = lf;

      out.field.d_time(i, j) =
          two_pi * xi + lf / (g * g) + gp / (2 * g * g * g) - two_pi * gp * q2.real() / (g * g * g);
      out.field.d_freq(i, j) = -g * g * lt + two_pi * gp / g * q2.imag();

      out.direct.d_time(i, j) = two_pi * xi + two_pi * q1.imag() / g;
      out.direct.d_freq(i, j) = -two_pi * g * q1.real() + two_pi * gp / g * q2.imag();
    }
  }
  return out;
}

}  // namespace fbpghi
