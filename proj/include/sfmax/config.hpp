#pragma once

// Problem configuration and shared value types.
//
// The model: a rank-one-spiked sample covariance with n snapshots, whitened by
// a noise-only sample covariance with p snapshots, both over m sensors. The
// largest generalized eigenvalue of that pair is the statistic whose
// distribution this library evaluates. Throughout, alpha = p - m and
// beta = m - n; the sample-deficient regime means n < m <= p.

#include <cmath>
#include <stdexcept>
#include <string>

namespace sfmax {

// Raised when a computation detects it cannot deliver its accuracy contract
// (catastrophic cancellation past the monitored threshold, or a result outside
// tolerance of the mathematically required range).
class numerical_instability_error : public std::runtime_error {
 public:
  explicit numerical_instability_error(const std::string& what)
      : std::runtime_error(what) {}
};

// Dimensions and spike strength for the spiked two-sample problem.
//   m    sensors, p >= m noise-only snapshots, n < m signal snapshots,
//   eta  spike power (SNR on linear scale), eta > 0 for the spiked laws.
struct SpikedFConfig {
  long m = 0;
  long n = 0;
  long p = 0;
  double eta = 0.0;

  long alpha() const { return p - m; }
  long beta() const { return m - n; }
  // c_eta = eta / (1 + eta), the natural series variable.
  double c_eta() const { return eta / (1.0 + eta); }

  // Validates the dimension envelope. Throws std::invalid_argument with a
  // message naming the violated constraint.
  void validate() const;
  // As validate(), and additionally requires eta > 0.
  void validate_spiked() const;
};

// A probability that has been range-checked. Values overshooting [0,1] by at
// most kOvershootTol are clamped; larger overshoots throw
// numerical_instability_error, because they indicate a broken evaluation
// rather than representable roundoff.
class Probability {
 public:
  static constexpr double kOvershootTol = 1e-9;

  Probability() = default;
  static Probability from_raw(double v, const char* context);

  double value() const { return v_; }
  operator double() const { return v_; }

 private:
  double v_ = 0.0;
};

}  // namespace sfmax
