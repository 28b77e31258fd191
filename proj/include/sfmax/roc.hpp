#pragma once

// Receiver operating characteristics of the largest-root detector. The
// detector thresholds lambda_hat = (p/n) * lambda_max, so every probability
// here is an evaluation of the exact cdfs at kappa * threshold with
// kappa = n / p. Closed forms for the alpha = 0 and n = 1 corners and the
// fixed-c asymptotic regime are provided alongside the exact curves.

#include <string>
#include <vector>

#include "sfmax/cdf_exact.hpp"
#include "sfmax/config.hpp"

namespace sfmax::roc {

// Exact-evaluation detector: dimensions from `base`, statistic scaled by
// kappa = n / p (precomputed at construction).
struct DetectorConfig {
  SpikedFConfig base;
  double kappa = 0.0;

  static DetectorConfig make(const SpikedFConfig& base_cfg) {
    DetectorConfig d;
    d.base = base_cfg;
    d.kappa = static_cast<double>(base_cfg.n) / static_cast<double>(base_cfg.p);
    return d;
  }
};

enum class Provenance {
  exact,
  closed_form_alpha0,
  closed_form_n1,
  asymptotic,
  upper_bound,
  empirical,
};

const char* provenance_name(Provenance p);

struct RocPoint {
  double pf = 0.0;
  double pd = 0.0;
  Provenance provenance = Provenance::exact;
};

// Large-system regime: p and m grow together with c = (p - m + 1) * eta / m
// held fixed while n stays finite.
struct AsymptoticRegime {
  double c = 0.0;
  long n = 1;
};

// P(lambda_hat > lambda_th | no spike).
double p_false_alarm(double lambda_th, const DetectorConfig& cfg);

// P(lambda_hat > lambda_th | spike gamma). gamma overrides cfg.base.eta.
double p_detect(double gamma, double lambda_th, const DetectorConfig& cfg);

// Threshold with p_false_alarm(threshold) = alpha_level, by bracketing
// bisection: terminates when |pfa - alpha_level| <= 1e-10 and the bracket's
// relative width is <= 1e-14, within 200 steps.
double threshold_for_pfa(double alpha_level, const DetectorConfig& cfg);

// Exact (pf, pd) curve over the given false-alarm grid.
std::vector<RocPoint> roc_exact(double gamma, const DetectorConfig& cfg,
                                const std::vector<double>& pf_grid);

// Closed-form detection probability for p = m (alpha = 0).
double roc_alpha0_closed_form(double gamma, long m, long n, double pf);

// Closed-form detection probability for a single signal snapshot (n = 1)
// with p = m:  pd = 1 - (1 - pf) / (1 + gamma - gamma * (1-pf)^{1/m}).
double roc_n1_closed_form(double gamma, long m, double pf);

// Fixed-c large-system approximation:
//   pd = 1 - (1 - pf) / (1 - (c/n) * ln(1 - pf))^n.
double roc_asymptotic(const AsymptoticRegime& regime, double pf);

// Universal upper bound across n at fixed c:  pd <= 1 - (1 - pf)^{c + 1}.
double roc_asymptotic_upper_bound(double c, double pf);

}  // namespace sfmax::roc
