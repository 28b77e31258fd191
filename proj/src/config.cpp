#include "sfmax/config.hpp"

#include <sstream>

namespace sfmax {

namespace {
constexpr long kMaxSensors = 256;
constexpr long kMaxAlpha = 48;
}  // namespace

void SpikedFConfig::validate() const {
  if (n < 1) {
    throw std::invalid_argument("SpikedFConfig: n must be >= 1");
  }
  if (n >= m) {
    throw std::invalid_argument(
        "SpikedFConfig: requires m > n (the signal side must be "
        "sample-deficient; n >= m is a different regime)");
  }
  if (p < m) {
    throw std::invalid_argument(
        "SpikedFConfig: requires p >= m (the noise covariance estimate must "
        "be full rank; p < m makes the pencil singular)");
  }
  if (m > kMaxSensors) {
    std::ostringstream os;
    os << "SpikedFConfig: m = " << m << " exceeds the supported maximum "
       << kMaxSensors;
    throw std::invalid_argument(os.str());
  }
  if (alpha() > kMaxAlpha) {
    std::ostringstream os;
    os << "SpikedFConfig: p - m = " << alpha()
       << " exceeds the supported maximum " << kMaxAlpha
       << " (determinant order grows with p - m)";
    throw std::invalid_argument(os.str());
  }
  if (!std::isfinite(eta) || eta < 0.0) {
    throw std::invalid_argument("SpikedFConfig: eta must be finite and >= 0");
  }
}

void SpikedFConfig::validate_spiked() const {
  validate();
  if (eta <= 0.0) {
    throw std::invalid_argument(
        "SpikedFConfig: eta must be > 0 for the spiked distribution; "
        "use the null-law functions for eta = 0");
  }
}

Probability Probability::from_raw(double v, const char* context) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << context << ": non-finite probability value";
    throw numerical_instability_error(os.str());
  }
  if (v < -kOvershootTol || v > 1.0 + kOvershootTol) {
    std::ostringstream os;
    os << context << ": value " << v << " is outside [0,1] beyond tolerance "
       << kOvershootTol;
    throw numerical_instability_error(os.str());
  }
  Probability p;
  p.v_ = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return p;
}

}  // namespace sfmax
