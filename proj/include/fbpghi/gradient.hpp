#pragma once

#include "fbpghi/core.hpp"
#include "fbpghi/filterbank.hpp"

#include <Eigen/Core>

namespace fbpghi {

/// Phase partial derivatives per cell, in radians.
struct GradientField {
  RealGrid d_time;  ///< d psi / dx at (na, xi_k), radians per second
  RealGrid d_freq;  ///< d psi / d xi at (na, xi_k), radians per Hz
};

/// log(max(m, rel_floor * max(m))). Throws DegenerateInputError for all-zero m.
RealGrid log_magnitude(const MagnitudeGrid& m, double rel_floor = 1e-10);

/// Centered differences along n with step a / sample_rate seconds; one-sided at the ends.
RealGrid diff_time(const RealGrid& v, Index a, double sample_rate);

/// Average of forward and backward difference quotients along k at the given
/// (strictly increasing) centers; one-sided at the ends.
RealGrid diff_freq(const RealGrid& v, const Eigen::ArrayXd& centers);

/// diff_freq applied to the gamma sequence.
Eigen::ArrayXd gamma_derivative(const Eigen::ArrayXd& gammas, const Eigen::ArrayXd& centers);

/// Magnitude-only gradient estimates for a peak-normalized Gaussian bank:
///   d_time = 2 pi xi_k + gamma'_k / (2 gamma_k^3) + D_k(log m~) / gamma_k^2
///   d_freq = -gamma_k^2 D_n(log m)
/// where m~ = m * gamma^(1/2) is the magnitude for unit-energy filters and
/// gamma' comes from gamma_derivative. The terms involving T^2 g0 are dropped.
GradientField estimate_phase_gradients(const MagnitudeGrid& m, const Eigen::ArrayXd& centers,
                                       const Eigen::ArrayXd& gammas, Index a, double sample_rate,
                                       double rel_floor = 1e-10);

/// Same, with explicit slopes gamma'_k.
GradientField estimate_phase_gradients(const MagnitudeGrid& m, const Eigen::ArrayXd& centers,
                                       const Eigen::ArrayXd& gammas,
                                       const Eigen::ArrayXd& gamma_slopes, Index a,
                                       double sample_rate, double rel_floor = 1e-10);

/// Estimates for the bank's layout. Slopes are differenced over the scale
/// channels only; edge channels get slope 0.
GradientField estimate_phase_gradients(const MagnitudeGrid& m, const FilterBank& fb,
                                       double rel_floor = 1e-10);

/// Exact gradients computed from the signal with auxiliary filters T g0 and T^2 g0.
struct OracleGradients {
  GradientField field;   ///< via the log-magnitude form, including the T^2 g0 terms
  GradientField direct;  ///< straight from the coefficient quotients
  RealGrid dlogm_time;   ///< d log M / dx, 1/s
  RealGrid dlogm_freq;   ///< d log M / d xi for unit-energy filters, 1/Hz
  BoolGrid reliable;     ///< |V| >= rel_floor * max |V|; other cells hold 0
};

OracleGradients oracle_phase_gradients(const RealSignal& s, const FilterBank& fb,
                                       double rel_floor = 1e-7);

}  // namespace fbpghi
