#pragma once

// Monte Carlo oracle for the analytic distributions: draws the largest
// generalized eigenvalue of (signal sample covariance, noise sample
// covariance) pairs directly from complex Gaussian data and compares the
// empirical law against the exact cdfs. Reproducibility is absolute: every
// trial owns a disjoint counter range of a counter-based generator, so
// results are bit-identical for any thread count.

#include <cstdint>
#include <functional>
#include <vector>

#include "sfmax/config.hpp"
#include "sfmax/roc.hpp"

namespace sfmax::mc {

// Identifies an independent random stream: generators with different
// (seed, stream_id) pairs never share counter blocks.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Philox 4x64 with 10 rounds, bit-compatible with the widely used
// implementation in numpy.random: key = (seed, stream_id), 256-bit counter,
// uniforms mapped to (0, 1) via the top 53 bits plus a half-ulp offset.
class Philox4x64 {
 public:
  Philox4x64(RngStream stream, std::uint64_t block_hi = 0)
      : key_{stream.seed, stream.stream_id} {
    ctr_[0] = 0;
    ctr_[1] = block_hi;
    ctr_[2] = 0;
    ctr_[3] = 0;
  }

  // One 10-round block permutation; pure function of key and counter.
  static void block(const std::uint64_t key[2], const std::uint64_t ctr[4],
                    std::uint64_t out[4]);

  std::uint64_t next_raw();
  double next_u01();  // in (0, 1), never exactly 0 or 1

 private:
  std::uint64_t key_[2];
  std::uint64_t ctr_[4];
  std::uint64_t buf_[4];
  int buf_pos_ = 4;  // empty
};

enum class Hypothesis { H0, H1 };

// One draw of the detector statistic (already at detector scale, i.e. the
// largest eigenvalue of the p-normalized noise-whitened pencil). Under H1 the
// spike sits on the first coordinate with power cfg.eta. If the noise sample
// covariance fails its Cholesky factorization the trial is redrawn once from
// the generator's following blocks before giving up.
double sample_lambda_max(const SpikedFConfig& cfg, Hypothesis hyp,
                         Philox4x64& rng);

struct EmpiricalCdf {
  std::vector<double> samples;  // ascending
  long count = 0;

  // Right-continuous empirical cdf at x.
  double at(double x) const;
  // Empirical q-quantile (0 < q < 1), by the ceiling-index convention.
  double quantile(double q) const;
};

// `trials` draws under `hyp`, trial t seeded by counter block t of `stream`.
// `threads` only partitions work; the sample set is independent of it.
EmpiricalCdf empirical_cdf(const SpikedFConfig& cfg, Hypothesis hyp,
                           long trials, RngStream stream, int threads = 1);

// Empirical ROC: thresholds are empirical H0 quantiles at the requested
// false-alarm rates; pd is the fraction of H1 draws above each threshold.
// Uses `trials` draws per hypothesis (H1 drawn with eta = gamma).
std::vector<roc::RocPoint> empirical_roc(const SpikedFConfig& cfg, double gamma,
                                         long trials,
                                         const std::vector<double>& pf_grid,
                                         RngStream stream, int threads = 1);

// Two-sided Kolmogorov-Smirnov distance sup_x |F_hat(x) - F(x)|, evaluating
// the jump on both sides of every sample point.
double ks_distance(const EmpiricalCdf& ecdf,
                   const std::function<double(double)>& analytic_cdf);

}  // namespace sfmax::mc
