#pragma once

// Exact finite-dimensional distribution of the largest generalized eigenvalue
// of the whitened spiked sample covariance, plus the matching joint eigenvalue
// densities. All formulas are finite determinantal expressions or absolutely
// convergent series in c_eta * y with y = x / (1 + x); evaluation switches
// between the two representations based on a predicted-cancellation rule.

#include <vector>

#include "sfmax/config.hpp"
#include "sfmax/log_scaled.hpp"

namespace sfmax::cdf {

// Determinant entry Psi_{i,j}(y): a Pochhammer-weighted Jacobi polynomial in
// 2/y - 1. Valid index range 1 <= i <= alpha+1, 2 <= j <= alpha+1, and the
// polynomial degree n + i - j must be >= 0; out-of-range indices throw
// std::invalid_argument. Requires 0 < y <= 1.
LogScaled psi_entry(long i, long j, double y, const SpikedFConfig& cfg);

// First-column entry Phi_i(y): a beta-term sum of factorial ratios over powers
// of (c_eta * y). All terms positive. Requires eta > 0 and 0 < y <= 1.
LogScaled phi_entry(long i, double y, const SpikedFConfig& cfg);

// First-column entry Omega_i(y): an alternating factorial sum against
// terminating hypergeometric values in z = -c_eta*y / (1 - c_eta*y).
// Requires eta > 0 and 0 < y <= 1. The log-scaled variant is the primary
// implementation; the double version saturates if the value overflows.
double omega_entry(long i, double y, const SpikedFConfig& cfg);
LogScaled omega_entry_log(long i, double y, const SpikedFConfig& cfg);

// P(lambda_max <= x) under the rank-one spike, raw eigenvalue scale x >= 0.
// Rejects eta <= 0 (use cdf_max_null for the null law). Throws
// numerical_instability_error if the result cannot be certified to lie within
// 1e-9 of [0, 1]; overshoots within that tolerance are clamped.
Probability cdf_max_spiked(double x, const SpikedFConfig& cfg);

// P(lambda_max <= x) under the null (no spike); cfg.eta is ignored.
Probability cdf_max_null(double x, const SpikedFConfig& cfg);

// Spiked cdf for the square case p = m (alpha = 0), evaluated by the two-term
// closed form that exists there; falls back to a determinant-free series when
// the closed form would cancel catastrophically. Independent of the general
// cdf_max_spiked code path.
Probability cdf_alpha0_spiked(double x, long m, long n, double eta);

// Joint density of all n ordered eigenvalues at lambdas (strictly ascending,
// consecutive gaps >= 1e-8; violations throw std::invalid_argument).
double joint_density_spiked(const std::vector<double>& lambdas,
                            const SpikedFConfig& cfg);
// Null counterpart; cfg.eta is ignored.
double joint_density_null(const std::vector<double>& lambdas,
                          const SpikedFConfig& cfg);

namespace detail {

// q-th moment of the shifted Jacobi polynomial:
//   integral over [0,1] of s^q P_d^{(0,beta)}(2s - 1) ds,
// in closed form via falling factorials. Exact zero for beta <= q < beta + d.
LogScaled jacobi_moment(long q, long d, long beta);

// Correlation-kernel normalization constant K(nn, alpha, beta) from the
// finite-rank expansion underlying the series route.
LogScaled kernel_constant(long nn, long alpha, long beta);

// Normalizer of the spiked joint eigenvalue density (spike factor excluded).
LogScaled joint_density_constant(long m, long n, long p);

// Normalizer of the null joint eigenvalue density.
LogScaled null_density_constant(long m, long n, long p);

// Constant multiplying the determinantal form of the spiked cdf.
LogScaled spiked_cdf_constant(long m, long n, long p);

// Symmetric spike factor g(x_1..x_n) entering the spiked joint density,
// evaluated by its everywhere-positive series representation.
LogScaled spike_series_factor(const std::vector<double>& xs,
                              const SpikedFConfig& cfg);

// Predicted decimal digits lost by the determinantal cdf route at y; the
// series route is used when this exceeds kDetRouteMaxLossDigits.
double det_route_loss_digits(const SpikedFConfig& cfg, double y);
inline constexpr double kDetRouteMaxLossDigits = 2.0;

// Runtime cancellation ceiling: any monitored signed sum that loses more
// than this many digits aborts the route (falls back or throws).
inline constexpr double kCancellationAbortDigits = 12.0;

}  // namespace detail

}  // namespace sfmax::cdf
